"""Scalar fields for lattice and form entries.

Three modes are supported:

* ``rational``  -- exact :class:`fractions.Fraction` arithmetic,
* ``quadirr``   -- exact Q-linear combinations of 1, sqrt(s_1), ..., sqrt(s_m)
  for distinct squarefree s_i > 1,
* ``float``     -- IEEE doubles with an equality tolerance ``eps_eq``.

Exact values of both exact modes are :class:`Surd` instances; a rational is a
Surd with only the ``1`` term.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import mpmath
from sympy import factorint

from .errors import ConfigParse, FieldError


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return ``(a, s)`` with ``n == a*a*s`` and ``s`` squarefree."""
    if n <= 0:
        raise ValueError("squarefree_decompose expects a positive integer")
    a, s = 1, 1
    for p, e in factorint(n).items():
        a *= p ** (e // 2)
        if e % 2:
            s *= p
    return a, s


def is_squarefree(n: int) -> bool:
    return n > 0 and all(e == 1 for e in factorint(n).values())


class Surd:
    """Exact number ``sum_s c_s * sqrt(s)`` with rational ``c_s``.

    The key ``1`` stores the rational part. Products of two different
    irrational radicals are rejected, which keeps every value inside the span
    of the declared radical basis.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        for s, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[int(s)] = c
        self._terms = tuple(sorted(clean.items()))
        self._hash = None

    @classmethod
    def rational(cls, value) -> "Surd":
        return cls({1: Fraction(value)})

    @classmethod
    def sqrt_of(cls, value) -> "Surd":
        """Exact square root of a non-negative rational."""
        value = Fraction(value)
        if value < 0:
            raise FieldError(f"square root of negative number {value}")
        if value == 0:
            return cls()
        num = value.numerator * value.denominator
        a, s = squarefree_decompose(num)
        return cls({s: Fraction(a, value.denominator)})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self._terms if s != 1)

    def is_rational(self) -> bool:
        return all(s == 1 for s, _ in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise FieldError(f"{self} is not rational")
        return self.terms.get(1, Fraction(0))

    def coords(self, basis: tuple[int, ...]) -> tuple[Fraction, ...]:
        """Coordinates on the radical basis ``(1, sqrt(basis[0]), ...)``."""
        t = self.terms
        extra = set(t) - {1} - set(basis)
        if extra:
            raise FieldError(f"radicands {sorted(extra)} outside basis {basis}")
        return (t.get(1, Fraction(0)),) + tuple(t.get(s, Fraction(0)) for s in basis)

    def _coerce(self, other):
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Fraction)):
            return Surd.rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = self.terms
        for s, c in other._terms:
            t[s] = t.get(s, Fraction(0)) + c
        return Surd(t)

    __radd__ = __add__

    def __neg__(self):
        return Surd({s: -c for s, c in self._terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[int, Fraction] = {}
        for s1, c1 in self._terms:
            for s2, c2 in other._terms:
                if s1 == 1 or s2 == 1:
                    key, c = s1 * s2, c1 * c2
                elif s1 == s2:
                    key, c = 1, c1 * c2 * s1
                else:
                    raise FieldError(
                        f"product sqrt({s1})*sqrt({s2}) leaves the radical basis")
                out[key] = out.get(key, Fraction(0)) + c
        return Surd(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by zero surd")
        if len(other._terms) != 1:
            raise FieldError(f"division by the compound surd {other} is not supported")
        (s, c), = other._terms
        # 1/(c sqrt s) = sqrt(s)/(c s)
        return self * Surd({s: 1 / (c * s)})

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def to_mpf(self):
        return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(s)
                           for s, c in self._terms)

    def __float__(self):
        if self.is_rational():
            return float(self.to_fraction())
        with mpmath.workdps(30):
            return float(self.to_mpf())

    def sign(self) -> int:
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.to_fraction() > 0 else -1
        # a nonzero element of the span of independent radicals cannot vanish;
        # 80 digits separates it from zero for any config-sized coefficients
        with mpmath.workdps(80):
            v = self.to_mpf()
        return 1 if v > 0 else -1

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for s, c in self._terms:
            cs = str(c)
            if s == 1:
                parts.append(cs)
            elif c in (1, -1):
                parts.append(f"{cs[:-1]}sqrt({s})")
            else:
                parts.append(f"{cs}*sqrt({s})")
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class ScalarField:
    """Declares how matrix entries are parsed, compared and combined."""

    mode: str = "rational"
    radicands: tuple[int, ...] = ()
    eps_eq: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("rational", "quadirr", "float"):
            raise FieldError(f"unknown field mode {self.mode!r}")
        if self.mode == "quadirr":
            if not self.radicands:
                raise FieldError("quadirr field needs at least one radicand")
            if len(set(self.radicands)) != len(self.radicands):
                raise FieldError("radicands must be distinct")
            for s in self.radicands:
                if s <= 1 or not is_squarefree(s):
                    raise FieldError(f"radicand {s} is not a squarefree integer > 1")
        elif self.radicands:
            raise FieldError(f"{self.mode} field takes no radicands")
        if self.eps_eq <= 0:
            raise FieldError("eps_eq must be positive")

    @property
    def exact(self) -> bool:
        return self.mode != "float"

    @classmethod
    def from_spec(cls, text: str, eps_eq: float = 1e-12) -> "ScalarField":
        """Parse ``rational``, ``float`` or ``quadirr(2,3)``."""
        text = text.strip()
        m = re.fullmatch(r"quadirr\s*\(([\d\s,]+)\)", text)
        if m:
            rads = tuple(int(v) for v in m.group(1).split(",") if v.strip())
            return cls("quadirr", rads, eps_eq)
        if text in ("rational", "float"):
            return cls(text, (), eps_eq)
        raise FieldError(f"cannot parse field declaration {text!r}")

    def element(self, value):
        """Coerce a Python number, string or Surd into this field."""
        if isinstance(value, str):
            return self.parse(value)
        if self.mode == "float":
            return float(value)
        if isinstance(value, Surd):
            s = value
        elif isinstance(value, float):
            if not value.is_integer():
                raise FieldError(f"float {value} given to exact field; use a fraction string")
            s = Surd.rational(int(value))
        else:
            s = Surd.rational(Fraction(value))
        self._check_span(s)
        return s

    def _check_span(self, s: Surd):
        bad = set(s.radicands) - set(self.radicands)
        if bad:
            raise FieldError(f"value {s} uses radicands {sorted(bad)} not declared in field")

    def parse(self, text: str):
        val = _ExprParser(text, exact=self.exact).parse()
        if self.exact:
            self._check_span(val)
        return val

    def eq(self, a, b) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= self.eps_eq * max(1.0, abs(a), abs(b))

    def zero(self):
        return Surd() if self.exact else 0.0

    def one(self):
        return Surd.rational(1) if self.exact else 1.0

    def describe(self) -> str:
        if self.mode == "quadirr":
            return "quadirr(" + ",".join(map(str, self.radicands)) + ")"
        return self.mode


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\d*\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)"
                    r"|(\d+)|(sqrt)|([-+*/^()]))")


class _ExprParser:
    """Recursive-descent parser for entries like ``-3/2*sqrt(5) + 1``.

    Exact mode only admits integers, ``/``, ``sqrt`` of rationals and integer
    powers; float mode also accepts decimals and real exponents.
    """

    def __init__(self, text: str, exact: bool):
        self.text = text
        self.exact = exact
        self.tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ConfigParse(f"unexpected character in {self.text!r}", column=pos + 1)
            if m.group(1):
                if exact:
                    raise ConfigParse(f"decimal literal in exact field: {self.text!r}",
                                      column=pos + 1)
                self.tokens.append(("num", float(m.group(1))))
            elif m.group(2):
                self.tokens.append(("num", int(m.group(2))))
            elif m.group(3):
                self.tokens.append(("sqrt", None))
            else:
                self.tokens.append(("op", m.group(4)))
            pos = m.end()
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def _take(self):
        tok = self._peek()
        self.i += 1
        return tok

    def _lit(self, v):
        if self.exact:
            return Surd.rational(v)
        return float(v)

    def parse(self):
        if not self.tokens:
            raise ConfigParse(f"empty numeric entry {self.text!r}")
        val = self._expr()
        if self.i != len(self.tokens):
            raise ConfigParse(f"trailing tokens in {self.text!r}")
        return val

    def _expr(self):
        val = self._term()
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._take()[1]
            rhs = self._term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def _term(self):
        val = self._factor()
        while self._peek() in (("op", "*"), ("op", "/")):
            op = self._take()[1]
            rhs = self._factor()
            val = val * rhs if op == "*" else val / rhs
        return val

    def _factor(self):
        if self._peek() in (("op", "-"), ("op", "+")):
            op = self._take()[1]
            v = self._factor()
            return -v if op == "-" else v
        base = self._atom()
        if self._peek() == ("op", "^"):
            self._take()
            expo = self._factor()
            return self._power(base, expo)
        return base

    def _power(self, base, expo):
        if self.exact:
            if not (isinstance(expo, Surd) and expo.is_rational()
                    and expo.to_fraction().denominator == 1):
                raise ConfigParse(f"non-integer exponent in exact field: {self.text!r}")
            n = int(expo.to_fraction())
            if n < 0:
                return reduce(lambda a, b: a * b, [Surd.rational(1) / base] * (-n), Surd.rational(1))
            return reduce(lambda a, b: a * b, [base] * n, Surd.rational(1))
        return float(base) ** float(expo)

    def _atom(self):
        kind, val = self._take()
        if kind == "num":
            return self._lit(val)
        if kind == "sqrt":
            if self._take() != ("op", "("):
                raise ConfigParse(f"expected '(' after sqrt in {self.text!r}")
            arg = self._expr()
            if self._take() != ("op", ")"):
                raise ConfigParse(f"unbalanced parenthesis in {self.text!r}")
            if self.exact:
                if not arg.is_rational():
                    raise ConfigParse(f"nested radical in exact field: {self.text!r}")
                return Surd.sqrt_of(arg.to_fraction())
            return math.sqrt(arg)
        if (kind, val) == ("op", "("):
            v = self._expr()
            if self._take() != ("op", ")"):
                raise ConfigParse(f"unbalanced parenthesis in {self.text!r}")
            return v
        raise ConfigParse(f"unexpected token {val!r} in {self.text!r}")
