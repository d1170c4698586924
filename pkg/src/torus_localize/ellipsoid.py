"""Integer points on ellipsoids ``Q(k) = n`` for integer forms.

Covers exact Fincke-Pohst enumeration, the binary reduction to
``K_1^2 + q K_2^2``, the Cilleruelo-Cordoba products, Gaussian-integer
representation generation and the Linnik congruence filters.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import (CapExceeded, HalfIntegerMatrix, LevelTooLarge, NoRepresentations,
                     NotBinary, NotIntegerForm, NotPositiveDefinite, ResidueScanTooLarge,
                     UnfactoredInput)
from .lattice import QuadraticForm, SpectralStratum, _fraction_det
from .numtheory import UNITS, FactoredInteger, gmul, gpow, merge_factors, r2, two_squares_prime
from .parallel import chunked_map
from .scalars import ScalarField, squarefree_decompose

N_CAP = 10 ** 12
M_CAP = 10 ** 4


def integer_form(coeffs, d: int | None = None) -> QuadraticForm:
    """Convenience constructor for integer-coefficient forms."""
    coeffs = list(coeffs)
    if d is None:
        d = {3: 2, 6: 3, 10: 4}[len(coeffs)]
    return QuadraticForm.from_coeffs(d, [int(c) for c in coeffs], ScalarField("rational"))


def _ldl(Q: QuadraticForm):
    """Exact ``Q(k) = sum_i D_i (k_i + sum_{j>i} mu_ij k_j)^2``."""
    d = Q.d
    S = [[Q.S[i][j].to_fraction() for j in range(d)] for i in range(d)]
    D, mu = [], []
    for i in range(d):
        piv = S[i][i]
        D.append(piv)
        mu.append({j: S[i][j] / piv for j in range(i + 1, d)})
        for r in range(i + 1, d):
            f = S[r][i] / piv
            for c in range(i + 1, d):
                S[r][c] -= f * S[i][c]
    return D, mu


def _int_range(c: Fraction, r: Fraction):
    """Integers ``k`` with ``(k + c)^2 <= r`` (endpoints rounded outward, then exact)."""
    if r < 0:
        return range(0)
    s = Fraction(math.isqrt(r.numerator * r.denominator), r.denominator)
    lo = math.floor(-c - s) - 1
    hi = math.ceil(-c + s) + 1
    while (lo + c) ** 2 > r and lo <= hi:
        lo += 1
    while (hi + c) ** 2 > r and hi >= lo:
        hi -= 1
    return range(lo, hi + 1)


def _rational_sqrt(t: Fraction):
    if t < 0:
        return None
    a, b = math.isqrt(t.numerator), math.isqrt(t.denominator)
    if a * a == t.numerator and b * b == t.denominator:
        return Fraction(a, b)
    return None


def _enumerate_slice(D, mu, n: Fraction, d: int, outer_values):
    out = []

    def rec(i, ks, rem):
        c = sum((mu[i][j] * ks[j] for j in range(i + 1, d)), Fraction(0))
        if i == 0:
            root = _rational_sqrt(rem / D[0])
            if root is None:
                return
            for s in ((root,) if root == 0 else (root, -root)):
                k0 = s - c
                if k0.denominator == 1:
                    ks[0] = int(k0)
                    out.append(tuple(ks))
            return
        for k in _int_range(c, rem / D[i]):
            ks[i] = k
            rec(i - 1, ks, rem - D[i] * (k + c) ** 2)

    for kd in outer_values:
        ks = [0] * d
        ks[d - 1] = kd
        rem = n - D[d - 1] * kd * kd
        if rem < 0:
            continue
        if d == 1:
            if rem == 0:
                out.append(tuple(ks))
            continue
        rec(d - 2, ks, rem)
    return out


def enumerate_level_set(Q: QuadraticForm, n: int, n_cap: int = N_CAP, threads: int = 1,
                        B=None) -> SpectralStratum:
    """All integer ``k`` with ``Q(k) = n`` by exact Fincke-Pohst enumeration."""
    if not Q.is_integer():
        raise NotIntegerForm("enumerate_level_set needs an integer-coefficient form")
    n = int(n)
    if n < 0:
        return SpectralStratum.build(Q, n, np.zeros((0, Q.d), dtype=np.int64), B)
    if n > n_cap:
        raise LevelTooLarge(f"level {n} exceeds N_cap={n_cap}; use gaussian_representations")
    D, mu = _ldl(Q)
    nF = Fraction(n)
    outer = list(_int_range(Fraction(0), nF / D[-1]))
    chunks = [outer[i:i + 256] for i in range(0, len(outer), 256)]
    parts = chunked_map(lambda ch: _enumerate_slice(D, mu, nF, Q.d, ch), chunks, threads)
    pts = [p for part in parts for p in part]
    return SpectralStratum.build(Q, n, np.array(pts, dtype=np.int64).reshape(-1, Q.d), B)


def level_counts(Q: QuadraticForm, n_max: int) -> dict[int, int]:
    """``#{k : Q(k) = n}`` for every ``n <= n_max`` (box scan with exact bounds)."""
    if not Q.is_integer():
        raise NotIntegerForm("level_counts needs an integer form")
    S = Q.matrix()
    # |k_i| <= sqrt(n_max * (S^{-1})_ii)
    Sinv = np.linalg.inv(S)
    R = int(math.isqrt(int(n_max * Sinv.diagonal().max()) + 1)) + 1
    r = np.arange(-R, R + 1, dtype=np.int64)
    grids = np.meshgrid(*([r] * Q.d), indexing="ij")
    K = np.stack([g.ravel() for g in grids], axis=1)
    coeffs = Q.integer_coeffs()
    vals = sum(c * K[:, i] * K[:, j] for c, (i, j) in zip(coeffs, Q.pairs))
    vals = vals[vals <= n_max]
    counts = np.bincount(vals, minlength=n_max + 1)
    return {int(v): int(c) for v, c in enumerate(counts) if c}


def good_levels(Q: QuadraticForm, n_max: int, top: int = 10) -> list[tuple[int, int]]:
    """Levels ``n <= n_max`` with the largest ``#K^n`` (ties broken by smaller n)."""
    counts = level_counts(Q, n_max)
    counts.pop(0, None)
    return sorted(counts.items(), key=lambda t: (-t[1], t[0]))[:top]


# ---------------------------------------------------------------- binary reduction

@dataclass(frozen=True)
class BinaryReduction:
    q11: int
    q12: int
    q22: int
    tq: int
    p: int
    q: int
    T: tuple

    @property
    def scale(self) -> int:
        return self.p ** 2 * self.q11

    @property
    def reduced_form(self) -> QuadraticForm:
        return integer_form([1, 0, self.q])

    def pulled_back_coeffs(self) -> tuple[int, int, int]:
        """Coefficients of ``Q(T K)`` as an integer binary form in ``K``."""
        (a, b), (c, e) = self.T
        q11, q12, q22 = self.q11, self.q12, self.q22
        # k1 = a K1 + b K2, k2 = c K1 + e K2
        A = q11 * a * a + q12 * a * c + q22 * c * c
        Bc = 2 * q11 * a * b + q12 * (a * e + b * c) + 2 * q22 * c * e
        C = q11 * b * b + q12 * b * e + q22 * e * e
        return A, Bc, C

    def identity_holds(self) -> bool:
        """``Q(T K) - p^2 q11 (K_1^2 + q K_2^2)`` is the zero polynomial."""
        return self.pulled_back_coeffs() == (self.scale, 0, self.scale * self.q)


def binary_reduce(Q: QuadraticForm) -> BinaryReduction:
    if Q.d != 2:
        raise NotBinary("binary_reduce needs a binary form")
    q11, q12, q22 = Q.integer_coeffs()
    tq = 4 * q11 * q22 - q12 * q12
    if tq <= 0 or q11 <= 0:
        raise NotPositiveDefinite("binary form is not positive definite")
    p, q = squarefree_decompose(tq)
    T = ((p, -q12), (0, 2 * q11))
    return BinaryReduction(q11, q12, q22, tq, p, q, T)


def embed(reduction: BinaryReduction, points, N: int) -> np.ndarray:
    """Map solutions of ``K_1^2 + q K_2^2 = N`` into ``Q(k) = p^2 q11 N``."""
    P = np.asarray(points, dtype=object).reshape(-1, 2)
    T = np.array(reduction.T, dtype=object)
    imgs = P @ T.T if len(P) else P
    n = reduction.scale * int(N)
    q11, q12, q22 = reduction.q11, reduction.q12, reduction.q22
    for (K1, K2), (k1, k2) in zip(P, imgs):
        if K1 * K1 + reduction.q * K2 * K2 != N:
            raise ValueError(f"point {(K1, K2)} is not on the reduced ellipse at level {N}")
        assert q11 * k1 * k1 + q12 * k1 * k2 + q22 * k2 * k2 == n
    return imgs


# ---------------------------------------------------------------- CC sequence

@dataclass(frozen=True)
class CCInteger:
    q: int
    j: int
    upper: int
    factored: FactoredInteger | None
    value: int


def cc_upper_index(q: int, j: int) -> int:
    return math.floor(j * math.exp(4.0 * math.sqrt(q)) + 1e-9)


def cc_sequence(q: int, j: int, m_cap: int = M_CAP, factor: bool = True) -> CCInteger:
    """``N_j = prod_{m=1}^{floor(j e^{4 sqrt q})} (q m^2 + 1)``, optionally fully factored."""
    if q < 1 or squarefree_decompose(q)[0] != 1:
        raise ValueError(f"q={q} must be a squarefree positive integer")
    if j < 1:
        raise ValueError("j must be positive")
    upper = cc_upper_index(q, j)
    if upper > m_cap:
        raise CapExceeded(f"upper index {upper} exceeds M_cap={m_cap}")
    value = 1
    facs: dict = {}
    for m in range(1, upper + 1):
        f = q * m * m + 1
        value *= f
        if factor:
            facs = merge_factors(facs, FactoredInteger.of(f).as_dict())
    fi = FactoredInteger(value, tuple(sorted(facs.items()))) if factor else None
    return CCInteger(q, j, upper, fi, value)


# ---------------------------------------------------------------- two squares

@dataclass(frozen=True)
class Representations:
    N: int
    points: list
    total: int
    sampled: bool
    seed: int | None = None


def gaussian_representations(N: FactoredInteger, cap: int = 10 ** 5,
                             seed: int = 0) -> Representations:
    """Pairs ``(a, b)`` with ``a^2 + b^2 = N`` composed from Gaussian primes.

    All ``r_2(N)`` representations are returned when they number at most
    ``cap``; otherwise ``cap`` distinct ones are drawn uniformly over the
    divisor choices with ``random.Random(seed)``.
    """
    if not isinstance(N, FactoredInteger):
        raise UnfactoredInput("gaussian_representations needs a FactoredInteger")
    facs = N.as_dict()
    total = r2(facs)
    if total == 0:
        raise NoRepresentations(f"{N.value} is not a sum of two squares")
    base = (1, 0)
    choices = []  # per split prime: list of Gaussian integers, one per exponent split
    for p, e in facs.items():
        if p == 2:
            base = gmul(base, gpow((1, 1), e))
        elif p % 4 == 3:
            base = gmul(base, (p ** (e // 2), 0))
        else:
            a, b = two_squares_prime(p)
            pi, pibar = (a, b), (a, -b)
            choices.append([gmul(gpow(pi, s), gpow(pibar, e - s)) for s in range(e + 1)])
    points = []
    if total <= cap:
        for combo in product(*choices):
            z = base
            for w in combo:
                z = gmul(z, w)
            for u in UNITS:
                points.append(gmul(z, u))
        sampled = False
    else:
        rng = random.Random(seed)
        seen = set()
        attempts = 0
        while len(points) < cap and attempts < 50 * cap:
            attempts += 1
            z = base
            for opts in choices:
                z = gmul(z, opts[rng.randrange(len(opts))])
            z = gmul(z, UNITS[rng.randrange(4)])
            if z not in seen:
                seen.add(z)
                points.append(z)
        sampled = True
    for a, b in points:
        if a * a + b * b != N.value:
            raise AssertionError("representation check failed")
    points.sort()
    return Representations(N.value, points, total, sampled, seed if sampled else None)


# ---------------------------------------------------------------- Linnik filters

@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    reasons: list
    modulus: int
    witness: tuple | None
    witness_lexicographic: bool


def _doubled_matrix(Q: QuadraticForm):
    Qp = [[2 * Q.S[i][j].to_fraction() for j in range(Q.d)] for i in range(Q.d)]
    if any(v.denominator != 1 for row in Qp for v in row):
        raise HalfIntegerMatrix(
            "Q' = 2S is not integral; the doubled form 2Q has an integral matrix and may be used")
    return [[int(v) for v in row] for row in Qp]


def _sumset_mod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    M = len(a)
    conv = np.fft.irfft(np.fft.rfft(a.astype(float)) * np.fft.rfft(b.astype(float)), n=M)
    return conv > 0.5


def _diag_residues(diag, n, M):
    """Lexicographically first ``k0 in [0, M)^d`` with ``sum a_i k_i^2 = n mod M``."""
    x = np.arange(M, dtype=object if M > 3 * 10 ** 9 else np.int64)
    sets = []
    for a in diag:
        s = np.zeros(M, dtype=bool)
        s[(a * x * x) % M] = True
        sets.append(s)
    suffix = [None] * (len(diag) + 1)
    z = np.zeros(M, dtype=bool)
    z[0] = True
    suffix[-1] = z
    for i in range(len(diag) - 1, -1, -1):
        suffix[i] = _sumset_mod(sets[i], suffix[i + 1])
    r = n % M
    if not suffix[0][r]:
        return None
    k0 = []
    for i, a in enumerate(diag):
        rests = (r - a * x * x) % M
        ok = np.nonzero(suffix[i + 1][rests.astype(np.int64)])[0]
        xi = int(ok[0])
        k0.append(xi)
        r = (r - a * xi * xi) % M
    return tuple(k0)


def _box_residue_scan(coeffs, pairs, d, n, M, limit=2 ** 24):
    if M ** d > limit:
        return "too-large"
    r = np.arange(M, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    K = np.stack([g.ravel() for g in grids], axis=1)
    vals = np.zeros(len(K), dtype=np.int64)
    for c, (i, j) in zip(coeffs, pairs):
        vals = (vals + (c % M) * ((K[:, i] * K[:, j]) % M)) % M
    hit = np.nonzero(vals == n % M)[0]
    return tuple(int(v) for v in K[hit[0]]) if len(hit) else None


def _crt_pair(r1, m1, r2_, m2):
    g = math.gcd(m1, m2)
    assert g == 1
    t = ((r2_ - r1) * pow(m1, -1, m2)) % m2
    return r1 + m1 * t, m1 * m2


def linnik_admissible(Q: QuadraticForm, n: int) -> Admissibility:
    """Congruence (and for d=3, squarefree/coprimality) filters on the level ``n``."""
    if Q.d not in (3, 4):
        raise ValueError("linnik_admissible is defined for d in {3, 4}")
    Qp = _doubled_matrix(Q)
    if not Q.is_integer():
        raise NotIntegerForm("linnik_admissible needs an integer form")
    detQp = abs(int(_fraction_det([[Fraction(v) for v in row] for row in Qp])))
    M = 2 ** 7 * detQp ** 3
    coeffs = Q.integer_coeffs()
    pairs = Q.pairs
    reasons = []
    diagonal = all(c == 0 for c, (i, j) in zip(coeffs, pairs) if i != j)
    lexi = True
    if diagonal:
        witness = _diag_residues([coeffs[pairs.index((i, i))] for i in range(Q.d)], n, M)
    else:
        witness = _box_residue_scan(coeffs, pairs, Q.d, n, M)
        if witness == "too-large":
            lexi = False
            witness = _crt_witness(coeffs, pairs, Q.d, n, M)
    ok = witness is not None
    if not ok:
        reasons.append(f"no k0 with Q(k0) = n mod {M}")
    if Q.d == 3:
        if n <= 0 or squarefree_decompose(n)[0] != 1:
            ok = False
            reasons.append(f"n={n} is not squarefree")
        if math.gcd(n, 2 * detQp) != 1:
            ok = False
            reasons.append(f"gcd(n, 2|det Q'|) = {math.gcd(n, 2 * detQp)} != 1")
    return Admissibility(ok, reasons, M, witness, lexi)


def _crt_witness(coeffs, pairs, d, n, M):
    G = [[0] * d for _ in range(d)]
    for c, (i, j) in zip(coeffs, pairs):
        if i == j:
            G[i][i] = 2 * c
        else:
            G[i][j] = G[j][i] = c
    per = []
    for p, e in FactoredInteger.of(M).factors:
        pe = p ** e
        w = _box_residue_scan(coeffs, pairs, d, n, pe, limit=2 ** 22)
        if w == "too-large":
            w = _jordan_witness(G, n, p, e)
        if w is None:
            return None
        per.append((w, pe))
    k0 = []
    for i in range(d):
        rem, mod = 0, 1
        for w, pe in per:
            rem, mod = _crt_pair(rem, mod, w[i], pe)
        k0.append(rem % mod)
    return tuple(k0)


def _val(x: int, p: int, E: int) -> int:
    if x == 0:
        return E
    v = 0
    while x % p == 0 and v < E:
        x //= p
        v += 1
    return v


def _jordan_split(G, p: int, E: int):
    """Blocks of ``U^T G U`` (mod p^E) for unimodular ``U``; blocks have size 1 or 2."""
    P = p ** E
    d = len(G)
    G = [[x % P for x in row] for row in G]
    U = [[int(i == j) for j in range(d)] for i in range(d)]

    def add_col(i, j, s):  # e_i <- e_i + s e_j
        for r in range(d):
            U[r][i] = (U[r][i] + s * U[r][j]) % P
        for r in range(d):
            G[r][i] = (G[r][i] + s * G[r][j]) % P
        for c in range(d):
            G[i][c] = (G[i][c] + s * G[j][c]) % P

    def swap(i, j):
        for r in range(d):
            U[r][i], U[r][j] = U[r][j], U[r][i]
            G[r][i], G[r][j] = G[r][j], G[r][i]
        G[i], G[j] = G[j], G[i]

    def divide(num, den):
        v = _val(den, p, E)
        if _val(num, p, E) < v:
            raise ArithmeticError("non-integral elimination step")
        return (num // p ** v) * pow(den // p ** v, -1, P) % P

    blocks = []
    start = 0
    while start < d:
        idx = range(start, d)
        best = min(((_val(G[i][j], p, E), i, j) for i in idx for j in idx if j >= i))
        v, i, j = best
        diag = [(_val(G[t][t], p, E), t) for t in idx]
        dmin = min(diag)
        if dmin[0] == v:
            swap(start, dmin[1])
            size = 1
        elif p != 2:
            add_col(i, j, 1)
            swap(start, i)
            size = 1
        else:
            swap(start, i)
            swap(start + 1, j if j != start else i)
            size = 2
        if size == 1:
            a = G[start][start]
            for r in range(start + 1, d):
                if G[r][start]:
                    add_col(r, start, (-divide(G[r][start], a)) % P)
        else:
            a, b, c = G[start][start], G[start][start + 1], G[start + 1][start + 1]
            det = (a * c - b * b) % P
            for r in range(start + 2, d):
                gi, gj = G[r][start], G[r][start + 1]
                if gi or gj:
                    s = divide((c * gi - b * gj) % P, det)
                    t = divide((a * gj - b * gi) % P, det)
                    add_col(r, start, (-s) % P)
                    add_col(r, start + 1, (-t) % P)
        blocks.append(list(range(start, start + size)))
        start += size
    return G, U, blocks


def _jordan_witness(G, n: int, p: int, e: int, limit: int = 2 ** 24):
    """Witness for ``Q(k) = n mod p^e`` via block value sets and sumsets."""
    d = len(G)
    det = abs(int(_fraction_det([[Fraction(v) for v in row] for row in G])))
    E = e + 2 * _val(det, p, 10 ** 6) + 4
    P = p ** E
    Gj, U, blocks = _jordan_split(G, p, E)
    pe = p ** e
    half = pow(2, -1, P) if p != 2 else None
    tables = []
    for blk in blocks:
        if len(blk) == 1:
            g = Gj[blk[0]][blk[0]]
            h = (g * half) % P if half else (g // 2)
            x = np.arange(pe, dtype=object)
            vals = np.array([(h * xi * xi) % pe for xi in range(pe)], dtype=np.int64)
            assign = x.reshape(-1, 1)
        else:
            if pe ** 2 > limit:
                raise ResidueScanTooLarge(f"2x2 Jordan block modulo {pe} is beyond desk scale")
            i, j = blk
            a, b, c = Gj[i][i] // 2 % pe, Gj[i][j] % pe, Gj[j][j] // 2 % pe
            xs, ys = np.meshgrid(np.arange(pe, dtype=np.int64), np.arange(pe, dtype=np.int64),
                                 indexing="ij")
            xs, ys = xs.ravel(), ys.ravel()
            vals = (a * xs % pe * xs + b * xs % pe * ys + c * ys % pe * ys) % pe
            assign = np.stack([xs, ys], axis=1)
        tables.append((vals, assign))
    suffix = [None] * (len(blocks) + 1)
    z = np.zeros(pe, dtype=bool)
    z[0] = True
    suffix[-1] = z
    for bi in range(len(blocks) - 1, -1, -1):
        s = np.zeros(pe, dtype=bool)
        s[tables[bi][0]] = True
        suffix[bi] = _sumset_mod(s, suffix[bi + 1])
    r = n % pe
    if not suffix[0][r]:
        return None
    kp = [0] * d
    for bi, blk in enumerate(blocks):
        vals, assign = tables[bi]
        ok = np.nonzero(suffix[bi + 1][(r - vals) % pe])[0]
        pick = int(ok[0])
        for t, idx in enumerate(blk):
            kp[idx] = int(assign[pick][t])
        r = (r - int(vals[pick])) % pe
    k = [sum(U[i][j] * kp[j] for j in range(d)) % pe for i in range(d)]
    qv = sum(G[i][j] * k[i] * k[j] for i in range(d) for j in range(d)) // 2
    if (qv - n) % pe:
        raise ArithmeticError("Jordan witness failed verification")
    return tuple(k)
