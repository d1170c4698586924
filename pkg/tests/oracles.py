"""Independent reference computations; nothing here imports the package."""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
import sympy

mpmath.mp.dps = 40


def bessel_series(nu, x, terms=80) -> float:
    """Power series of J_nu at high precision."""
    x = mpmath.mpf(x)
    s = mpmath.mpf(0)
    for k in range(terms):
        s += (-1) ** k * (x / 2) ** (2 * k + nu) / (mpmath.factorial(k) * mpmath.gamma(k + nu + 1))
    return float(s)


def j0_small(x, terms=40):
    """Vectorized J_0 power series in double precision; accurate to ~1e-15 for x <= 6."""
    x = np.asarray(x, dtype=float)
    t = -(x / 2) ** 2
    term = np.ones_like(x)
    s = np.ones_like(x)
    for k in range(1, terms):
        term = term * t / (k * k)
        s = s + term
    return s


def bisect_zero(f, a, b, tol=1e-13) -> float:
    fa = f(a)
    while b - a > tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def j0_zeros(count=3):
    """Zeros of J_0 by bisection on the series, bracketed by McMahon guesses."""
    out = []
    for s in range(1, count + 1):
        g = (s - 0.25) * math.pi
        out.append(bisect_zero(lambda x: bessel_series(0, x), g - 0.3, g + 0.3))
    return out


def count_sum_of_squares(n: int, d: int = 2) -> int:
    r = math.isqrt(n) + 1
    return sum(1 for k in itertools.product(range(-r, r + 1), repeat=d)
               if sum(v * v for v in k) == n)


def integer_level_points(coeffs, d, n, R):
    """Brute force over the box for an integer form given in upper-triangular order."""
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    out = set()
    for k in itertools.product(range(-R, R + 1), repeat=d):
        if sum(c * k[i] * k[j] for c, (i, j) in zip(coeffs, pairs)) == n:
            out.add(k)
    return out


def pullback_is_zero(q11, q12, q22, T, p, q) -> bool:
    """Symbolic expansion of Q(TK) - p^2 q11 (K1^2 + q K2^2)."""
    K1, K2 = sympy.symbols("K1 K2")
    k1 = T[0][0] * K1 + T[0][1] * K2
    k2 = T[1][0] * K1 + T[1][1] * K2
    expr = q11 * k1 ** 2 + q12 * k1 * k2 + q22 * k2 ** 2 - p * p * q11 * (K1 ** 2 + q * K2 ** 2)
    return sympy.expand(expr) == 0




def residue_scan(coeffs, d, n, M):
    """Lexicographically first k0 in [0, M)^d with Q(k0) = n mod M, by full enumeration."""
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    r = np.arange(M, dtype=np.int64)
    tail = np.stack([g.ravel() for g in np.meshgrid(*([r] * (d - 1)), indexing="ij")], axis=1)
    for k0 in range(M):
        K = np.concatenate([np.full((len(tail), 1), k0), tail], axis=1)
        v = np.zeros(len(K), dtype=np.int64)
        for c, (i, j) in zip(coeffs, pairs):
            v = (v + c * K[:, i] * K[:, j]) % M
        hit = np.nonzero(v == n % M)[0]
        if len(hit):
            return tuple(int(x) for x in K[hit[0]])
    return None


def real_sh_explicit(xi):
    """Real spherical harmonics for l <= 2 as explicit polynomials, no Condon-Shortley phase.

    Order (l, m) with m = -l..l; sin-type for m < 0 and cos-type for m > 0.
    """
    x, y, z = xi[..., 0], xi[..., 1], xi[..., 2]
    c0 = 1 / (2 * math.sqrt(math.pi))
    c1 = math.sqrt(3 / (4 * math.pi))
    c2 = math.sqrt(15 / (4 * math.pi))
    c20 = math.sqrt(5 / (16 * math.pi))
    c22 = math.sqrt(15 / (16 * math.pi))
    return np.stack([
        np.full_like(x, c0),
        c1 * y, c1 * z, c1 * x,
        c2 * x * y, c2 * y * z, c20 * (3 * z * z - 1), c2 * x * z, c22 * (x * x - y * y),
    ], axis=-1)


def radial_gram(R, s, n=4000):
    """int_{B_R} exp(i x.v) dx for |v| = s in d=2 via Gauss-Legendre in r of 2 pi r J_0(s r)."""
    t, w = np.polynomial.legendre.leggauss(n // 20)
    r = 0.5 * R * (t + 1)
    w = 0.5 * R * w
    return float(np.sum(w * 2 * math.pi * r * np.array([bessel_series(0, s * ri, 120) for ri in r])))


def planewave_ls_distance(xis, target, R, m=401):
    """Dense-grid least squares of a target on B_R by the span of exp(i xi.x)."""
    ax = np.linspace(-R, R, m)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    mask = X ** 2 + Y ** 2 <= R * R
    P = np.stack([X[mask], Y[mask]], axis=1)
    cell = (ax[1] - ax[0]) ** 2
    E = np.exp(1j * P @ np.asarray(xis).T)
    h = target(P)
    coef, *_ = np.linalg.lstsq(E, h.astype(complex), rcond=1e-12)
    r = h - E @ coef
    return math.sqrt(float(np.sum(np.abs(r) ** 2)) * cell)


def herglotz_quadrature(p, x, d=2, n=400):
    """Trapezoid (d=2) or product Gauss (d=3) evaluation of int e^{i x.xi} p(xi) dsigma."""
    x = np.atleast_2d(x)
    if d == 2:
        th = 2 * math.pi * np.arange(n) / n
        xi = np.stack([np.cos(th), np.sin(th)], axis=1)
        w = np.full(n, 2 * math.pi / n)
    else:
        t, wt = np.polynomial.legendre.leggauss(n // 2)
        ph = 2 * math.pi * np.arange(n) / n
        T, PH = np.meshgrid(t, ph, indexing="ij")
        s = np.sqrt(1 - T ** 2)
        xi = np.stack([s * np.cos(PH), s * np.sin(PH), T], axis=-1).reshape(-1, 3)
        w = (wt[:, None] * np.full(n, 2 * math.pi / n)[None, :]).ravel()
    return np.exp(1j * x @ xi.T) @ (w * p(xi))
