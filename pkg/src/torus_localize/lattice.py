"""Lattices, dual lattices and their Gram quadratic forms.

A lattice is given by the matrix ``A`` whose rows are basis vectors.  The dual
lattice has basis ``B = (A^T)^{-1}`` and the Laplace eigenvalues of the torus
are ``Q(k) = 4 pi^2 |B k|^2`` for integer ``k``.  Forms built from a lattice
carry the factor ``4 pi^2`` as a declared ``unit`` so that the exact
coefficient matrix is ``B^T B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np

from .errors import FieldError, NotPositiveDefinite, SingularBasis, ZeroVector
from .scalars import ScalarField, Surd

FOUR_PI2 = 4.0 * math.pi ** 2


def _as_float_matrix(M) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in M], dtype=float)


def _mp_matrix(M):
    return mpmath.matrix([[v.to_mpf() if isinstance(v, Surd) else mpmath.mpf(v) for v in row]
                          for row in M])


def _exact_det_nonzero(M) -> bool:
    with mpmath.workdps(80):
        return abs(mpmath.det(_mp_matrix(M))) > mpmath.mpf(10) ** -60


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice with basis rows ``A`` (2 <= d <= 4)."""

    A: tuple
    field: ScalarField = dc_field(default_factory=ScalarField)

    def __post_init__(self):
        A = tuple(tuple(self.field.element(v) for v in row) for row in self.A)
        d = len(A)
        if not 2 <= d <= 4 or any(len(r) != d for r in A):
            raise ValueError("lattice basis must be a square matrix with 2 <= d <= 4")
        object.__setattr__(self, "A", A)
        if self.field.exact:
            if not _exact_det_nonzero(A):
                raise SingularBasis("basis matrix is singular")
        else:
            Af = _as_float_matrix(A)
            eps_det = 1e-12 * max(1.0, np.abs(Af).max()) ** d
            if abs(np.linalg.det(Af)) <= eps_det:
                raise SingularBasis("basis matrix is numerically singular")

    @property
    def d(self) -> int:
        return len(self.A)

    def dual(self):
        return dual_basis(self.A, self.field)

    def form(self) -> "QuadraticForm":
        return gram_form(self.dual(), self.field)


def _exact_inverse(M):
    """Gauss-Jordan inverse over Surd entries (pivots must be monomials)."""
    d = len(M)
    aug = [list(M[i]) + [Surd.rational(int(i == j)) for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = None
        for r in range(col, d):
            if not aug[r][col].is_zero():
                if piv is None or len(aug[r][col].terms) < len(aug[piv][col].terms):
                    piv = r
        if piv is None:
            raise SingularBasis("basis matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(d):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[d:]) for row in aug)


def dual_basis(A, field: ScalarField | None = None):
    """Dual basis ``B = (A^T)^{-1}``; satisfies ``A B^T = I``."""
    if field is None:
        is_float_array = isinstance(A, np.ndarray) and A.dtype.kind == "f"
        exact = not is_float_array and _looks_exact(A)
        field = ScalarField("rational") if exact else ScalarField("float")
    A = tuple(tuple(field.element(v) for v in row) for row in A)
    d = len(A)
    At = tuple(tuple(A[j][i] for j in range(d)) for i in range(d))
    if field.exact:
        if not _exact_det_nonzero(A):
            raise SingularBasis("basis matrix is singular")
        return _exact_inverse(At)
    Af = _as_float_matrix(At)
    eps_det = 1e-12 * max(1.0, np.abs(Af).max()) ** d
    if abs(np.linalg.det(Af)) <= eps_det:
        raise SingularBasis("basis matrix is numerically singular")
    return np.linalg.inv(Af)


def _looks_exact(M) -> bool:
    return all(isinstance(v, (int, np.integer, Fraction, Surd, str)) for row in M for v in row)


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric coefficient matrix ``S`` with ``Q(k) = unit * k.S k``.

    ``S[i][i] = q_ii`` and ``S[i][j] = q_ij / 2`` for the coefficient list
    ``Q(k) = sum_{i<=j} q_ij k_i k_j``.  ``dual`` optionally records a float
    matrix ``B`` with ``B^T B = S``; without it a Cholesky factor is used.
    """

    S: tuple
    field: ScalarField = dc_field(default_factory=ScalarField)
    unit: float = 1.0
    dual: np.ndarray | None = dc_field(default=None, compare=False, repr=False)

    def __post_init__(self):
        S = tuple(tuple(self.field.element(v) for v in row) for row in self.S)
        d = len(S)
        if not 2 <= d <= 4 or any(len(r) != d for r in S):
            raise ValueError("form matrix must be square with 2 <= d <= 4")
        for i in range(d):
            for j in range(i + 1, d):
                if not self.field.eq(S[i][j], S[j][i]):
                    raise ValueError("form matrix is not symmetric")
        object.__setattr__(self, "S", S)
        if not self._positive_definite():
            raise NotPositiveDefinite("quadratic form is not positive definite")
        if self.dual is not None:
            object.__setattr__(self, "dual", np.asarray(self.dual, dtype=float))

    # construction -----------------------------------------------------
    @classmethod
    def from_coeffs(cls, d: int, coeffs, field: ScalarField | None = None, unit: float = 1.0):
        """Build from ``[q_11, q_12, ..., q_1d, q_22, ..., q_dd]`` (i <= j order)."""
        field = field or ScalarField()
        coeffs = [field.element(c) for c in coeffs]
        if len(coeffs) != d * (d + 1) // 2:
            raise ValueError(f"expected {d * (d + 1) // 2} coefficients, got {len(coeffs)}")
        half = Surd.rational(Fraction(1, 2)) if field.exact else 0.5
        S = [[field.zero()] * d for _ in range(d)]
        it = iter(coeffs)
        for i in range(d):
            for j in range(i, d):
                c = next(it)
                if i == j:
                    S[i][i] = c
                else:
                    S[i][j] = S[j][i] = c * half
        return cls(tuple(map(tuple, S)), field, unit)

    @property
    def d(self) -> int:
        return len(self.S)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.d) for j in range(i, self.d)]

    def coeffs(self) -> list:
        """Coefficient list ``q_ij`` (i <= j, row-major)."""
        two = Surd.rational(2) if self.field.exact else 2.0
        return [self.S[i][j] if i == j else self.S[i][j] * two for i, j in self.pairs]

    def _positive_definite(self) -> bool:
        d = self.d
        if self.field.mode == "rational":
            for m in range(1, d + 1):
                M = [[self.S[i][j].to_fraction() for j in range(m)] for i in range(m)]
                if _fraction_det(M) <= 0:
                    return False
            return True
        if self.field.exact:
            with mpmath.workdps(80):
                Sm = _mp_matrix(self.S)
                return all(mpmath.det(Sm[:m, :m]) > mpmath.mpf(10) ** -60 for m in range(1, d + 1))
        Sf = self.matrix()
        return all(np.linalg.det(Sf[:m, :m]) > 0 for m in range(1, d + 1)) and \
            np.linalg.eigvalsh(Sf).min() > 0

    # evaluation -------------------------------------------------------
    def matrix(self) -> np.ndarray:
        return _as_float_matrix(self.S)

    def dual_matrix(self) -> np.ndarray:
        """Float ``B`` with ``B^T B = S`` (recorded dual basis or Cholesky)."""
        if self.dual is not None:
            return self.dual
        return np.linalg.cholesky(self.matrix()).T

    def is_integer(self) -> bool:
        if not self.field.exact:
            return False
        return all(c.is_rational() and c.to_fraction().denominator == 1 for c in self.coeffs())

    def integer_coeffs(self) -> list[int]:
        from .errors import NotIntegerForm
        if not self.is_integer():
            raise NotIntegerForm("form does not have integer coefficients")
        return [int(c.to_fraction()) for c in self.coeffs()]

    def value(self, k):
        """Exact (or float) value ``k.S k`` without the unit."""
        k = [int(v) for v in k]
        if len(k) != self.d:
            raise ValueError("dimension mismatch")
        total = self.field.zero()
        for (i, j), c in zip(self.pairs, self.coeffs()):
            if k[i] and k[j]:
                total = total + c * (k[i] * k[j])
        return total

    def values_float(self, K) -> np.ndarray:
        K = np.asarray(K, dtype=float)
        return np.einsum("pi,ij,pj->p", K, self.matrix(), K)

    def radical_basis(self) -> tuple[int, ...]:
        if self.field.mode == "quadirr":
            return self.field.radicands
        return ()

    def integer_coordinates(self):
        """Integer coordinate table of the coefficients.

        Returns ``(C, D)`` where ``C[p, b]`` is ``D`` times the coordinate of
        coefficient ``pairs[p]`` on the radical basis element ``b``
        (``b = 0`` is the rational part).
        """
        if not self.field.exact:
            raise FieldError("integer coordinates need an exact field")
        basis = self.radical_basis()
        rows = [c.coords(basis) for c in self.coeffs()]
        D = 1
        for r in rows:
            for v in r:
                D = D * v.denominator // math.gcd(D, v.denominator)
        C = [[int(v * D) for v in r] for r in rows]
        return C, D

    def exact_keys(self, K) -> np.ndarray:
        """Integer keys identifying the exact value ``k.S k`` for each row of K.

        Two rows have equal exact value iff their key rows are equal.
        """
        K = np.asarray(K, dtype=np.int64)
        C, _ = self.integer_coordinates()
        C = np.array(C, dtype=object if _too_big(C, K) else np.int64)
        mons = np.stack([K[:, i] * K[:, j] for i, j in self.pairs], axis=1)
        if C.dtype == object:
            mons = mons.astype(object)
        return mons @ C


def _too_big(C, K) -> bool:
    cmax = max((abs(v) for r in C for v in r), default=0)
    kmax = int(np.abs(K).max()) if np.size(K) else 0
    return cmax * (kmax ** 2) * 16 >= 2 ** 62


def _fraction_det(M) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


def gram_form(B, field: ScalarField | None = None) -> QuadraticForm:
    """Gram form ``Q(k) = 4 pi^2 |B k|^2`` with ``S = B^T B`` kept exact."""
    if field is None:
        is_float_array = isinstance(B, np.ndarray) and B.dtype.kind == "f"
        exact = not is_float_array and _looks_exact(B)
        field = ScalarField("rational") if exact else ScalarField("float")
    if field.exact:
        Bx = tuple(tuple(field.element(v) for v in row) for row in B)
        if not _exact_det_nonzero(Bx):
            raise SingularBasis("dual basis is singular")
        d = len(Bx)
        S = tuple(tuple(sum((Bx[r][i] * Bx[r][j] for r in range(d)), Surd()) for j in range(d))
                  for i in range(d))
        Bf = _as_float_matrix(Bx)
    else:
        Bf = np.asarray(B, dtype=float)
        d = Bf.shape[0]
        eps_det = 1e-12 * max(1.0, np.abs(Bf).max()) ** d
        if abs(np.linalg.det(Bf)) <= eps_det:
            raise SingularBasis("dual basis is numerically singular")
        S = Bf.T @ Bf
        S = 0.5 * (S + S.T)
        S = tuple(tuple(float(v) for v in row) for row in S)
    return QuadraticForm(S, field, FOUR_PI2, Bf)


def eigenvalue(Q: QuadraticForm, k, exact: bool = False):
    """Laplace eigenvalue ``lambda_k = Q(k)``.

    With ``exact=True`` the exact value of ``k.S k`` is returned, i.e. the
    eigenvalue in units of ``Q.unit`` (``4 pi^2`` for Gram forms).
    """
    v = Q.value(k)
    if exact:
        return v
    return Q.unit * float(v)


def direction(B, k) -> np.ndarray:
    """Unit frequency direction ``B k / |B k|``."""
    k = np.asarray(k)
    if not np.any(k):
        raise ZeroVector("direction of the zero vector is undefined")
    v = np.asarray(B, dtype=float) @ k.astype(float)
    return v / np.linalg.norm(v)


def directions(B, K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    V = K @ np.asarray(B, dtype=float).T
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms == 0):
        raise ZeroVector("direction of the zero vector is undefined")
    return V / norms[:, None]


@dataclass(frozen=True)
class SpectralStratum:
    """One eigenvalue level: integer frequencies and their unit directions."""

    n: object
    lam: float
    points: np.ndarray
    directions: np.ndarray

    def __len__(self):
        return len(self.points)

    @classmethod
    def build(cls, Q: QuadraticForm, n, points, B=None):
        pts = np.asarray(points, dtype=np.int64).reshape(-1, Q.d)
        order = np.lexsort(pts.T[::-1])
        pts = pts[order]
        B = Q.dual_matrix() if B is None else B
        nz = np.any(pts != 0, axis=1)
        dirs = np.zeros(pts.shape, dtype=float)
        if nz.any():
            dirs[nz] = directions(B, pts[nz])
        lam = Q.unit * float(n)
        return cls(n, lam, pts, dirs)

    def as_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(v) for v in p) for p in self.points}


def box_points(d: int, R: int) -> np.ndarray:
    """All integer vectors with ``|k|_inf <= R`` in lexicographic order."""
    r = np.arange(-R, R + 1, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_force_level(Q: QuadraticForm, level, R: int) -> set[tuple[int, ...]]:
    """Reference scan: all ``|k|_inf <= R`` with ``Q.value(k) == level``."""
    out = set()
    for k in product(range(-R, R + 1), repeat=Q.d):
        if Q.field.eq(Q.value(k), level):
            out.add(k)
    return out
