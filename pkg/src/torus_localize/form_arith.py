"""Arithmetic of quadratic forms: integer decompositions and eigenspaces.

A form ``Q = sum_r beta_r Q_r`` with integrally independent ``beta_r`` and
integer forms ``Q_r`` has ``Q(k') = Q(k)`` iff ``Q_r(k') = Q_r(k)`` for every
``r``.  This makes eigenspaces of irrational forms computable exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .ellipsoid import enumerate_level_set
from .errors import ApproximateAmbiguity, FloatModeUnsupported
from .lattice import QuadraticForm, SpectralStratum, box_points
from .parallel import chunked_map
from .scalars import ScalarField, Surd

D_MAX = 10 ** 6


@dataclass(frozen=True)
class FormDecomposition:
    """``Q = sum_r betas[r] * Q_r`` with ``Q_r`` given by integer coefficients.

    ``integer_forms[r]`` maps index pairs ``(i, j)`` (i <= j) to integers.
    ``partitioned`` is False when the coefficient classes were not integrally
    independent and the radical basis had to be used instead, in which case
    the supports of the ``Q_r`` may overlap.
    """

    d: int
    betas: list
    parts: list
    integer_forms: list
    approximate: bool = False
    partitioned: bool = True
    index_set: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.betas)

    def part_values(self, K) -> np.ndarray:
        """Integer matrix ``[Q_r(k)]`` of shape ``(len(K), m)``."""
        K = np.asarray(K, dtype=np.int64).reshape(-1, self.d)
        out = np.zeros((len(K), self.m), dtype=np.int64)
        for r, form in enumerate(self.integer_forms):
            for (i, j), c in form.items():
                out[:, r] += c * K[:, i] * K[:, j]
        return out

    def reconstruct(self, k):
        """``sum_r beta_r Q_r(k)`` in the betas' arithmetic."""
        vals = self.part_values([k])[0]
        total = Surd() if isinstance(self.betas[0], Surd) else 0.0
        for b, v in zip(self.betas, vals):
            total = total + b * int(v)
        return total

    def integer_form(self, r: int) -> QuadraticForm:
        coeffs = [self.integer_forms[r].get((i, j), 0)
                  for i in range(self.d) for j in range(i, self.d)]
        return QuadraticForm.from_coeffs(self.d, coeffs, ScalarField("rational")) \
            if _is_pd(self.d, coeffs) else _IntegerPolynomial(self.d, coeffs)

    def as_json(self) -> dict:
        return {
            "m": self.m,
            "betas": [str(b) if isinstance(b, Surd) else float(b) for b in self.betas],
            "parts": [[list(p) for p in part] for part in self.parts],
            "integer_forms": [{f"{i + 1}{j + 1}": c for (i, j), c in sorted(f.items())}
                              for f in self.integer_forms],
            "approximate": self.approximate,
            "partitioned": self.partitioned,
        }


class _IntegerPolynomial:
    """Integer quadratic polynomial that need not be positive definite."""

    def __init__(self, d, coeffs):
        self.d = d
        self._coeffs = list(coeffs)
        self.pairs = [(i, j) for i in range(d) for j in range(i, d)]

    def integer_coeffs(self):
        return list(self._coeffs)

    def value(self, k):
        return sum(c * k[i] * k[j] for c, (i, j) in zip(self._coeffs, self.pairs))

    def matrix(self):
        S = np.zeros((self.d, self.d))
        for c, (i, j) in zip(self._coeffs, self.pairs):
            if i == j:
                S[i, i] = c
            else:
                S[i, j] = S[j, i] = c / 2
        return S


def _is_pd(d, coeffs) -> bool:
    S = _IntegerPolynomial(d, coeffs).matrix()
    return bool(np.all(np.linalg.eigvalsh(S) > 0))


def _normalize(ratios: list[Fraction]):
    """Integers ``b`` (gcd 1, leading positive) and scale ``s`` with ``ratios = s*b``."""
    L = 1
    for t in ratios:
        L = L * t.denominator // math.gcd(L, t.denominator)
    ints = [int(t * L) for t in ratios]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    lead = next(v for v in ints if v != 0)
    sg = 1 if lead > 0 else -1
    return [v // (g * sg) for v in ints], Fraction(g * sg, L)


def _rank(rows: list[list[Fraction]]) -> int:
    M = [r[:] for r in rows]
    rank, ncol = 0, len(M[0]) if M else 0
    for c in range(ncol):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _rational_ratio(a: tuple, b: tuple):
    """``t`` with ``a = t*b`` coordinatewise, or None."""
    i0 = next(i for i, v in enumerate(b) if v != 0)
    t = a[i0] / b[i0]
    if all(x == t * y for x, y in zip(a, b)):
        return t
    return None


def decompose(Q: QuadraticForm, d_max: int = D_MAX) -> FormDecomposition:
    """Split the coefficients of ``Q`` (in units of ``Q.unit``) into rational classes."""
    if Q.field.exact:
        return _decompose_exact(Q)
    return _decompose_float(Q, d_max)


def _decompose_exact(Q: QuadraticForm) -> FormDecomposition:
    basis = Q.radical_basis()
    pairs = Q.pairs
    coeffs = Q.coeffs()
    index = [(p, c) for p, c in zip(pairs, coeffs) if not c.is_zero()]
    reps, classes = [], []  # reps: coordinate tuples; classes: list of (pair, ratio)
    for pair, c in index:
        v = c.coords(basis)
        for r, rep in enumerate(reps):
            t = _rational_ratio(v, rep)
            if t is not None:
                classes[r].append((pair, t))
                break
        else:
            reps.append(v)
            classes.append([(pair, Fraction(1))])
    if _rank([list(r) for r in reps]) == len(reps):
        betas, parts, forms = [], [], []
        for rep, cls in zip(reps, classes):
            ints, scale = _normalize([t for _, t in cls])
            unit = Surd(dict(zip((1,) + basis, rep)))
            betas.append(unit * scale)
            parts.append([p for p, _ in cls])
            forms.append({p: b for (p, _), b in zip(cls, ints)})
        return FormDecomposition(Q.d, betas, parts, forms, False, True, [p for p, _ in index])
    # classes are dependent over Z: decompose along the radical basis itself
    betas, parts, forms = [], [], []
    for b, s in enumerate((1,) + basis):
        col = [(pair, c.coords(basis)[b]) for pair, c in index]
        col = [(pair, t) for pair, t in col if t != 0]
        if not col:
            continue
        ints, scale = _normalize([t for _, t in col])
        betas.append(Surd({s: scale}))
        parts.append([p for p, _ in col])
        forms.append({p: v for (p, _), v in zip(col, ints)})
    return FormDecomposition(Q.d, betas, parts, forms, False, False, [p for p, _ in index])


def _float_ratio(x: float, y: float, d_max: int, eps: float):
    # a ratio of doubles that is truly rational is off by a few ulps only
    eps = min(eps, 1e-13)
    ratio = x / y
    frac = Fraction(ratio).limit_denominator(d_max)
    if abs(ratio - float(frac)) <= eps * max(1.0, abs(ratio)):
        return frac
    return None


def _decompose_float(Q: QuadraticForm, d_max: int) -> FormDecomposition:
    eps = Q.field.eps_eq
    pairs = Q.pairs
    coeffs = [float(c) for c in Q.coeffs()]
    scale = max(abs(c) for c in coeffs)
    index = [(p, c) for p, c in zip(pairs, coeffs) if abs(c) > eps * scale]
    reps, classes = [], []
    for pair, c in index:
        hits = []
        for r, rep in enumerate(reps):
            t = _float_ratio(c, rep, d_max, eps)
            if t is not None:
                hits.append((r, t))
        if len(hits) > 1:
            raise ApproximateAmbiguity(f"coefficient {pair} is rationally related to several classes")
        if hits:
            r, t = hits[0]
            classes[r].append((pair, t))
        else:
            reps.append(c)
            classes.append([(pair, Fraction(1))])
    betas, parts, forms = [], [], []
    for rep, cls in zip(reps, classes):
        ints, s = _normalize([t for _, t in cls])
        betas.append(rep * float(s))
        parts.append([p for p, _ in cls])
        forms.append({p: b for (p, _), b in zip(cls, ints)})
    return FormDecomposition(Q.d, betas, parts, forms, True, True, [p for p, _ in index])


@dataclass(frozen=True)
class IntegerMultipleResult:
    yes: bool
    beta: object
    integer_form: QuadraticForm | None
    decomposition: FormDecomposition


def is_integer_multiple(Q: QuadraticForm, d_max: int = D_MAX) -> IntegerMultipleResult:
    """Is ``Q`` (in units of ``Q.unit``) a multiple of an integer form?"""
    dec = decompose(Q, d_max)
    if dec.m == 1:
        return IntegerMultipleResult(True, dec.betas[0], dec.integer_form(0), dec)
    return IntegerMultipleResult(False, None, None, dec)


def _level_box_radius(Q: QuadraticForm, level: float) -> int:
    Sinv = np.linalg.inv(Q.matrix())
    return int(math.floor(math.sqrt(max(level, 0.0) * Sinv.diagonal().max()) * (1 + 1e-9))) + 1


def eigenspace_exact(Q: QuadraticForm, k0, R: int | None = None, threads: int = 1,
                     decomposition: FormDecomposition | None = None) -> SpectralStratum:
    """``K_{k0} = {k : Q(k) = Q(k0)}`` via the integer pieces of ``Q``.

    For integer multiples the full level set comes from exact enumeration.
    Otherwise the box ``|k|_inf <= R`` is scanned; ``R=None`` picks the radius
    that contains the whole ellipsoid, so the result is again complete.
    """
    if not Q.field.exact:
        raise FloatModeUnsupported("eigenspace_exact needs an exact scalar field")
    k0 = tuple(int(v) for v in k0)
    if R is not None and max(abs(v) for v in k0) > R:
        raise ValueError("k0 lies outside the scan box")
    dec = decomposition or decompose(Q)
    level = Q.value(k0)
    if dec.m == 1 and R is None:
        Q1 = dec.integer_form(0)
        st = enumerate_level_set(Q1, int(Q1.value(k0).to_fraction()), threads=threads)
        return SpectralStratum.build(Q, level, st.points)
    if R is None:
        R = _level_box_radius(Q, float(level))
    target = dec.part_values([k0])[0]
    r = np.arange(-R, R + 1, dtype=np.int64)
    chunks = [r[i:i + 64] for i in range(0, len(r), 64)]

    def scan(first):
        rest = box_points(Q.d - 1, R) if Q.d > 1 else np.zeros((1, 0), dtype=np.int64)
        K = np.concatenate([np.repeat(first, len(rest))[:, None],
                            np.tile(rest, (len(first), 1))], axis=1)
        hit = np.all(dec.part_values(K) == target, axis=1)
        return K[hit]

    pts = np.concatenate(chunked_map(scan, chunks, threads), axis=0)
    return SpectralStratum.build(Q, level, pts)


@dataclass(frozen=True)
class DiophantineReport:
    K_max: int
    tau: float
    worst: tuple
    margin: float
    max_multiplicity: int
    max_multiplicity_level: str
    m: int
    lemma_bound: int | None
    bound_ok: bool | None

    def as_json(self) -> dict:
        return {
            "K_max": self.K_max, "tau": self.tau, "worst": list(self.worst),
            "margin": self.margin, "max_multiplicity": self.max_multiplicity,
            "max_multiplicity_level": self.max_multiplicity_level, "m": self.m,
            "lemma_bound": self.lemma_bound, "bound_ok": self.bound_ok,
        }


def _l1_ball(N: int, K_max: int) -> np.ndarray:
    """Integer vectors of length N with ``sum |K_i| <= K_max``."""
    vecs = np.zeros((1, 0), dtype=np.int64)
    budget = np.array([K_max], dtype=np.int64)
    for _ in range(N):
        counts = 2 * budget + 1
        rows = np.repeat(np.arange(len(vecs)), counts)
        offs = np.concatenate([np.arange(-b, b + 1) for b in budget])
        vecs = np.concatenate([vecs[rows], offs[:, None]], axis=1)
        budget = budget[rows] - np.abs(offs)
    return vecs


def _exact_dot(coeffs, K) -> Surd:
    total = Surd()
    for c, k in zip(coeffs, K):
        if k:
            total = total + c * int(k)
    return total


def multiplicity_scan(Q: QuadraticForm, K_max: int, threads: int = 1):
    """Largest eigenvalue multiplicity among ``|k|_inf <= K_max`` and a level attaining it."""
    K = box_points(Q.d, K_max)
    if Q.field.exact:
        keys = Q.exact_keys(K)
        if keys.dtype == object:
            keys = np.array([hash(tuple(r)) for r in keys], dtype=np.int64)[:, None]
        _, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        best = int(counts.max())
        vals = Q.values_float(K)
        cand = np.nonzero(counts[inv] == best)[0]
        i = cand[np.argmin(vals[cand])]
        return best, str(Q.value(K[i]))
    vals = Q.values_float(K)
    order = np.argsort(vals, kind="stable")
    v = vals[order]
    eps = Q.field.eps_eq
    breaks = np.nonzero(np.diff(v) > eps * np.maximum(1.0, np.abs(v[1:])))[0] + 1
    groups = np.split(np.arange(len(v)), breaks)
    g = max(groups, key=len)
    return len(g), repr(float(v[g[0]]))


def diophantine_probe(Q: QuadraticForm, K_max: int, tau: float | None = None,
                      threads: int = 1) -> DiophantineReport:
    """Finite-scan evidence for the Diophantine condition and multiplicity bound."""
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    coeffs = Q.coeffs()
    N = len(coeffs)
    tau = float(N - 1) + 0.5 if tau is None else float(tau)
    z = np.array([float(c) for c in coeffs])
    Ks = _l1_ball(N, K_max)
    Ks = Ks[np.any(Ks != 0, axis=1)]
    dots = np.abs(Ks @ z)
    norms = np.abs(Ks).sum(axis=1).astype(float)
    margins = dots * norms ** tau
    scale = np.abs(z).max()
    if Q.field.exact:
        small = np.nonzero(dots <= 1e-8 * scale * norms)[0]
        for i in small:
            ex = _exact_dot(coeffs, Ks[i])
            if ex.is_zero():
                margins[i] = 0.0
            else:
                with mpmath.workdps(50):
                    margins[i] = float(abs(ex.to_mpf())) * norms[i] ** tau
    # ties go to the shortest tuple
    i = int(np.lexsort((norms, margins))[0])
    margin = float(margins[i])
    worst = Ks[i] if Ks[i][np.flatnonzero(Ks[i])[0]] > 0 else -Ks[i]
    mult, level = multiplicity_scan(Q, K_max, threads)
    dec = decompose(Q)
    full = dec.m == Q.d * (Q.d + 1) // 2
    bound = 2 ** Q.d if full else None
    return DiophantineReport(K_max, tau, tuple(int(v) for v in worst), margin, mult, level,
                             dec.m, bound, (mult <= bound) if full else None)
