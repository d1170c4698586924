"""Spectral geometry of flat tori and inverse localization of eigenfunctions."""

__version__ = "0.1.0"

from .errors import NumericFailure, TorusLocalizeError, ValidationError  # noqa: E402
from .lattice import (Lattice, QuadraticForm, SpectralStratum, direction, dual_basis,  # noqa: E402
                      eigenvalue, gram_form)
from .scalars import ScalarField, Surd  # noqa: E402

__all__ = [
    "__version__", "Lattice", "QuadraticForm", "SpectralStratum", "ScalarField", "Surd",
    "dual_basis", "gram_form", "eigenvalue", "direction",
    "TorusLocalizeError", "ValidationError", "NumericFailure",
]
