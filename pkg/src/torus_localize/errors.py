"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 2);
``NumericFailure`` subclasses signal a computation that could not be carried
out (CLI exit code 3).
"""


class TorusLocalizeError(Exception):
    pass


class ValidationError(TorusLocalizeError, ValueError):
    pass


class NumericFailure(TorusLocalizeError, ArithmeticError):
    pass


class ConfigParse(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


class FieldError(ValidationError):
    pass


class SingularBasis(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class NotIntegerForm(ValidationError):
    pass


class NotBinary(ValidationError):
    pass


class HalfIntegerMatrix(ValidationError):
    pass


class FloatModeUnsupported(ValidationError):
    pass


class DecompositionMissing(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class ResolutionTooCoarse(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class LevelTooLarge(ValidationError):
    pass


class CapExceeded(ValidationError):
    pass


class UnfactoredInput(ValidationError):
    pass


class ApproximateAmbiguity(NumericFailure):
    pass


class NoRepresentations(NumericFailure):
    pass


class EmptyStratum(NumericFailure):
    pass


class EmptyWindow(NumericFailure):
    pass


class DegenerateField(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class ResidueScanTooLarge(NumericFailure):
    pass
