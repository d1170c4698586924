"""Helmholtz fields as Herglotz transforms of polynomial densities.

``h(x) = int_{S^{d-1}} exp(i x.xi) p(xi) dsigma(xi)`` for d = 2, 3.

Densities are stored by coefficients: Fourier modes ``exp(i l theta)`` for
d=2 and real orthonormal spherical harmonics (no Condon-Shortley phase) for
d=3.  Fields come in two flavours sharing one interface
(``value``, ``derivative``, ``gradient``, ``hessian``): Herglotz fields and
finite plane-wave sums.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import OutOfDomain, ValidationError

R_MAX = 1e3
L_DERIV_MAX = 4


def bessel_j(nu, x):
    """``J_nu(x)`` for integer or half-integer ``nu >= 0`` and ``0 <= x <= 1e3``."""
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(nu < 0) or np.any(np.abs(2 * nu - np.round(2 * nu)) > 0):
        raise OutOfDomain("order must be an integer or half-integer >= 0")
    if np.any(x < 0) or np.any(x > R_MAX) or not np.all(np.isfinite(x)):
        raise OutOfDomain(f"argument must lie in [0, {R_MAX:g}]")
    out = special.jv(nu, x)
    return float(out) if out.ndim == 0 else out


def script_j(x, d: int = 2):
    """The radial Helmholtz solution ``int exp(i x.xi) dsigma``: 2pi J0 or 4pi sinc."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=1)
    if d == 2:
        out = 2 * np.pi * special.j0(r)
    elif d == 3:
        out = 4 * np.pi * np.sinc(r / np.pi)
    else:
        raise ValidationError("script_j is defined for d = 2, 3")
    return out


def script_j_radial_derivs(r, d: int = 2):
    """``(f, f', f'')`` of the radial profile of ``script_j``."""
    r = np.asarray(r, dtype=float)
    if d == 2:
        f = 2 * np.pi * special.j0(r)
        f1 = -2 * np.pi * special.j1(r)
        f2 = -np.pi * (special.j0(r) - special.jv(2, r))
        return f, f1, f2
    f = 4 * np.pi * special.spherical_jn(0, r)
    f1 = 4 * np.pi * special.spherical_jn(0, r, derivative=True)
    # j0'' = -j0 - 2 j0'/r, with the r -> 0 limit -1/3
    small = r < 1e-4
    rs = np.where(small, 1.0, r)
    f2 = np.where(small, 4 * np.pi * (-1 / 3 + r * r / 10),
                  -f - 2 * f1 / rs)
    return f, f1, f2


# real spherical harmonics ---------------------------------------------------

def sh_indices(L: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def real_sph_harm(L: int, xi) -> np.ndarray:
    """Columns ``Y_lm(xi)`` in ``sh_indices(L)`` order for unit vectors ``xi``.

    ``m > 0`` uses cos(m phi), ``m < 0`` uses sin(|m| phi); no Condon-Shortley
    phase, so ``Y_11 = sqrt(3/4pi) x`` and ``Y_1,-1 = sqrt(3/4pi) y``.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    ct = np.clip(xi[:, 2], -1.0, 1.0)
    phi = np.arctan2(xi[:, 1], xi[:, 0])
    cols = []
    for l, m in sh_indices(L):
        am = abs(m)
        norm = math.sqrt((2 * l + 1) / (4 * math.pi)
                         * math.exp(math.lgamma(l - am + 1) - math.lgamma(l + am + 1)))
        # lpmv carries the (-1)^m phase; undo it
        P = (-1) ** am * special.lpmv(am, l, ct)
        if m == 0:
            cols.append(norm * P)
        elif m > 0:
            cols.append(math.sqrt(2) * norm * P * np.cos(am * phi))
        else:
            cols.append(math.sqrt(2) * norm * P * np.sin(am * phi))
    return np.stack(cols, axis=1)


# quadrature on spheres and balls --------------------------------------------

@lru_cache(maxsize=64)
def sphere_rule(d: int, n: int):
    """Nodes and weights on S^{d-1}; exact for polynomials of degree < n (d=2: trig degree < n)."""
    if d == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n, 2 * np.pi / n)
    t, wt = np.polynomial.legendre.leggauss(n // 2 + 1)
    nphi = n + 1
    ph = 2 * np.pi * np.arange(nphi) / nphi
    T, P = np.meshgrid(t, ph, indexing="ij")
    S = np.sqrt(1 - T * T)
    nodes = np.stack([S * np.cos(P), S * np.sin(P), T], axis=-1).reshape(-1, 3)
    w = (wt[:, None] * np.full(nphi, 2 * np.pi / nphi)[None, :]).ravel()
    return nodes, w


def _nodes_for(L: int, r: float, d: int) -> int:
    """Node count resolving ``exp(i r xi.x) p(xi)`` to round-off."""
    base = 4 * L + 16 if d == 2 else 2 * L + 8
    return base + 2 * int(math.ceil(r)) + 8 * int(math.ceil(r ** (1 / 3))) + 24


def ball_rule(d: int, R: float, n_r: int = 40, n_ang: int = 80):
    """Polar product rule on the ball B_R (Gauss-Legendre in the radius)."""
    t, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * R * (t + 1)
    wr = 0.5 * R * wt * r ** (d - 1)
    xi, w = sphere_rule(d, n_ang)
    X = (r[:, None, None] * xi[None, :, :]).reshape(-1, d)
    W = (wr[:, None] * w[None, :]).ravel()
    return X, W


def ball_volume(d: int, R: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * R ** d


def ball_fourier(s, R: float, d: int):
    """``int_{B_R} exp(i v.x) dx`` for ``|v| = s``."""
    s = np.asarray(s, dtype=float)
    t = R * s
    vol = ball_volume(d, R)
    small = t < 1e-3
    ts = np.where(small, 1.0, t)
    ss = np.where(small, 1.0, s)
    big = (2 * np.pi * R / ss) ** (d / 2) * special.jv(d / 2, ts)
    series = vol * (1 - t * t / (2 * (d + 2)) + t ** 4 / (8 * (d + 2) * (d + 4)))
    return np.where(small, series, big)


def planewave_ball_gram(xis, R: float) -> np.ndarray:
    """``G_ab = int_{B_R} exp(i (xi_a - xi_b).x) dx`` (real and symmetric)."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    d = xis.shape[1]
    diff = np.linalg.norm(xis[:, None, :] - xis[None, :, :], axis=-1)
    return ball_fourier(diff, R, d)


# densities ------------------------------------------------------------------

@dataclass(frozen=True)
class HerglotzDensity:
    """Hermitian polynomial density on S^{d-1}.

    ``coeffs`` is complex: for d=2 indexed by Fourier mode ``l = -L..L``
    (position ``l + L``), for d=3 in ``sh_indices(L)`` order.
    Hermitian means ``p(-xi) = conj p(xi)``.
    """

    d: int
    L: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if self.d not in (2, 3):
            raise ValidationError("densities are supported for d = 2, 3")
        expect = 2 * self.L + 1 if self.d == 2 else (self.L + 1) ** 2
        if c.shape != (expect,):
            raise ValidationError(f"expected {expect} coefficients, got {c.shape}")
        gap = np.abs(c - self._hermitian_partner(c)).max(initial=0.0)
        if gap > 1e-12 * max(1.0, np.abs(c).max(initial=0.0)):
            raise ValidationError(f"density is not Hermitian (mismatch {gap:.2e})")

    def _hermitian_partner(self, c):
        if self.d == 2:
            ls = np.arange(-self.L, self.L + 1)
            return (-1.0) ** ls * np.conj(c[::-1])
        ls = np.array([l for l, _ in sh_indices(self.L)])
        return (-1.0) ** ls * np.conj(c)

    @classmethod
    def hermitize(cls, d: int, L: int, coeffs) -> "HerglotzDensity":
        """Nearest Hermitian density to arbitrary coefficients."""
        c = np.asarray(coeffs, dtype=complex)
        tmp = cls._unchecked(d, L, c)
        return cls(d, L, 0.5 * (c + tmp._hermitian_partner(c)))

    @classmethod
    def _unchecked(cls, d, L, coeffs):
        p = object.__new__(cls)
        object.__setattr__(p, "d", d)
        object.__setattr__(p, "L", L)
        object.__setattr__(p, "coeffs", np.asarray(coeffs, dtype=complex))
        return p

    @classmethod
    def constant(cls, d: int = 2, value: float = 1.0) -> "HerglotzDensity":
        if d == 2:
            return cls(2, 0, [value])
        return cls(3, 0, [value * math.sqrt(4 * math.pi)])

    @classmethod
    def random(cls, d: int, L: int, seed: int = 0) -> "HerglotzDensity":
        rng = np.random.default_rng(seed)
        n = 2 * L + 1 if d == 2 else (L + 1) ** 2
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return cls.hermitize(d, L, c / math.sqrt(n))

    def basis(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.d == 2:
            th = np.arctan2(xi[:, 1], xi[:, 0])
            return np.exp(1j * np.outer(th, np.arange(-self.L, self.L + 1)))
        return real_sph_harm(self.L, xi).astype(complex)

    def __call__(self, xi) -> np.ndarray:
        return self.basis(xi) @ self.coeffs

    def degrees(self) -> np.ndarray:
        if self.d == 2:
            return np.abs(np.arange(-self.L, self.L + 1))
        return np.array([l for l, _ in sh_indices(self.L)])

    def times_monomial(self, alpha) -> "HerglotzDensity":
        """Density of ``(i xi)^alpha p(xi)`` (exact projection by quadrature)."""
        alpha = tuple(int(a) for a in alpha)
        k = sum(alpha)
        if k == 0:
            return self
        L2 = self.L + k
        xi, w = sphere_rule(self.d, 2 * L2 + 4)
        vals = self(xi) * np.prod((1j * xi) ** np.array(alpha), axis=1)
        new = _project(self.d, L2, xi, w, vals)
        return HerglotzDensity.hermitize(self.d, L2, new)

    # text format: "dim d", "degree L", then lines "l m re im"
    # (d=2: l is the signed Fourier mode and m is 0)
    def to_text(self) -> str:
        out = [f"dim {self.d}", f"degree {self.L}"]
        keys = [(l, 0) for l in range(-self.L, self.L + 1)] if self.d == 2 else sh_indices(self.L)
        for (l, m), c in zip(keys, self.coeffs):
            if c != 0:
                out.append(f"{l} {m} {float(c.real)!r} {float(c.imag)!r}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HerglotzDensity":
        d = L = None
        entries = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "dim":
                    d = int(parts[1])
                elif parts[0] == "degree":
                    L = int(parts[1])
                else:
                    l, m = int(parts[0]), int(parts[1])
                    entries.append((l, m, complex(float(parts[2]), float(parts[3]))))
            except (IndexError, ValueError) as exc:
                raise ValidationError(f"density line {lineno}: cannot parse {raw!r}") from exc
        if d is None or L is None:
            raise ValidationError("density file needs 'dim' and 'degree' lines")
        n = 2 * L + 1 if d == 2 else (L + 1) ** 2
        c = np.zeros(n, dtype=complex)
        for l, m, v in entries:
            if d == 2:
                if abs(l) > L:
                    raise ValidationError(f"mode {l} exceeds degree {L}")
                c[l + L] += v
            else:
                if not (0 <= l <= L and -l <= m <= l):
                    raise ValidationError(f"harmonic ({l},{m}) outside degree {L}")
                c[l * l + l + m] += v
        return cls(d, L, c)


def _project(d, L, xi, w, vals):
    if d == 2:
        ls = np.arange(-L, L + 1)
        E = np.exp(-1j * np.outer(np.arctan2(xi[:, 1], xi[:, 0]), ls))
        return (w * vals) @ E / (2 * np.pi)
    Y = real_sph_harm(L, xi)
    return (w * vals) @ Y


# fields ---------------------------------------------------------------------

class Field:
    """Common interface: complex values and analytic derivatives at points."""

    d: int

    def derivative(self, alpha, X) -> np.ndarray:
        raise NotImplementedError

    def value(self, X) -> np.ndarray:
        return self.derivative((0,) * self.d, X)

    def gradient(self, X) -> np.ndarray:
        eye = np.eye(self.d, dtype=int)
        return np.stack([self.derivative(e, X) for e in eye], axis=-1)

    def hessian(self, X) -> np.ndarray:
        eye = np.eye(self.d, dtype=int)
        H = np.empty(np.atleast_2d(X).shape[:1] + (self.d, self.d), dtype=complex)
        for i in range(self.d):
            for j in range(i, self.d):
                H[:, i, j] = H[:, j, i] = self.derivative(eye[i] + eye[j], X)
        return H

    def laplacian(self, X) -> np.ndarray:
        eye = np.eye(self.d, dtype=int)
        return sum(self.derivative(2 * e, X) for e in eye)


def _check_points(X, d):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != d:
        raise ValidationError(f"points must have {d} coordinates")
    if X.size and np.linalg.norm(X, axis=1).max() > R_MAX:
        raise OutOfDomain(f"|x| must not exceed {R_MAX:g}")
    return X


class PlaneWaveField(Field):
    """``v(x) = sum_k amps[k] exp(i x.xis[k])`` with exact derivatives."""

    def __init__(self, xis, amps, chunk: int = 4096):
        self.xis = np.atleast_2d(np.asarray(xis, dtype=float))
        self.amps = np.asarray(amps, dtype=complex)
        self.d = self.xis.shape[1]
        self.chunk = chunk

    def derivative(self, alpha, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        coef = self.amps * np.prod((1j * self.xis) ** np.asarray(alpha), axis=1)
        out = np.empty(len(X), dtype=complex)
        for s in range(0, len(X), self.chunk):
            out[s:s + self.chunk] = np.exp(1j * X[s:s + self.chunk] @ self.xis.T) @ coef
        return out


def plane_wave_sum(J: int, d: int = 2) -> PlaneWaveField:
    """``sum_{j=1}^J cos(x1 cos(2 pi j/J) + x2 sin(2 pi j/J))``."""
    if d != 2 or J < 1:
        raise ValidationError("plane_wave_sum is defined for d=2 and J >= 1")
    th = 2 * np.pi * np.arange(1, J + 1) / J
    xi = np.stack([np.cos(th), np.sin(th)], axis=1)
    return PlaneWaveField(np.concatenate([xi, -xi]), np.full(2 * J, 0.5))


# calibrated radial constants ------------------------------------------------

_CAL_LOCK = threading.Lock()
_CAL: dict = {}


def radial_profile(l: int, r, d: int):
    """``J_{l+d/2-1}(r) / r^{d/2-1}``, finite at r = 0."""
    r = np.asarray(r, dtype=float)
    if d == 2:
        return special.jv(l, r)
    return math.sqrt(2 / math.pi) * special.spherical_jn(l, r)


def calibration_radius(l: int) -> float:
    return float(l + 1)


def b_constant(l: int, d: int) -> complex:
    """``b_l`` matched once against quadrature at radius ``l + 1``."""
    key = (d, l)
    if key not in _CAL:
        with _CAL_LOCK:
            if key not in _CAL:
                _CAL[key] = _calibrate(l, d, calibration_radius(l))
    return _CAL[key]


def _calibrate(l: int, d: int, r: float) -> complex:
    n = _nodes_for(l, r, d) + 32
    xi, w = sphere_rule(d, n)
    if d == 2:
        p = np.exp(1j * l * np.arctan2(xi[:, 1], xi[:, 0]))
        x = np.array([r, 0.0])
        h = np.sum(w * p * np.exp(1j * xi @ x))
        return complex(h / radial_profile(l, r, 2))
    Y = real_sph_harm(l, xi)[:, l * l + l]  # zonal Y_l0
    x = np.array([0.0, 0.0, r])
    h = np.sum(w * Y * np.exp(1j * xi @ x))
    y_axis = math.sqrt((2 * l + 1) / (4 * math.pi))
    return complex(h / (radial_profile(l, r, 3) * y_axis))


class HelmholtzField(Field):
    """Herglotz transform of a density; ``method`` is 'fourier-bessel' or 'quadrature'."""

    METHODS = ("fourier-bessel", "quadrature")

    def __init__(self, density: HerglotzDensity, method: str = "fourier-bessel",
                 chunk: int = 2048):
        if method not in self.METHODS:
            raise ValidationError(f"unknown method {method!r}")
        self.density = density
        self.d = density.d
        self.method = method
        self.chunk = chunk
        self._derived: dict = {}

    def _density_for(self, alpha) -> HerglotzDensity:
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) > L_DERIV_MAX:
            raise OutOfDomain(f"derivative order above {L_DERIV_MAX}")
        if alpha not in self._derived:
            self._derived[alpha] = self.density.times_monomial(alpha)
        return self._derived[alpha]

    def derivative(self, alpha, X):
        X = _check_points(X, self.d)
        if self.method == "quadrature":
            return self._quadrature(alpha, X)
        return self._fourier_bessel(self._density_for(alpha), X)

    def _fourier_bessel(self, p: HerglotzDensity, X):
        r = np.linalg.norm(X, axis=1)
        safe = np.where(r > 0, r, 1.0)
        U = np.where((r > 0)[:, None], X / safe[:, None], np.eye(self.d)[-1])
        B = p.basis(U)
        degs = p.degrees()
        out = np.zeros(len(X), dtype=complex)
        for l in np.unique(degs):
            cols = degs == l
            g = radial_profile(int(l), r, self.d) * b_constant(int(l), self.d)
            out += g * (B[:, cols] @ p.coeffs[cols])
        return out

    def _quadrature(self, alpha, X):
        rmax = float(np.linalg.norm(X, axis=1).max(initial=0.0))
        xi, w = sphere_rule(self.d, _nodes_for(self.density.L + sum(alpha), rmax, self.d))
        wp = w * self.density(xi) * np.prod((1j * xi) ** np.asarray(alpha), axis=1)
        out = np.empty(len(X), dtype=complex)
        for s in range(0, len(X), self.chunk):
            out[s:s + self.chunk] = np.exp(1j * X[s:s + self.chunk] @ xi.T) @ wp
        return out


def eval_herglotz(p: HerglotzDensity, x, method: str = "fourier-bessel"):
    return HelmholtzField(p, method).value(x)


def herglotz_derivative(p: HerglotzDensity, alpha, x, method: str = "fourier-bessel"):
    return HelmholtzField(p, method).derivative(alpha, x)


class ScriptJField(Field):
    """``script_j`` with closed-form derivatives up to second order."""

    def __init__(self, d: int = 2):
        self.d = d

    def derivative(self, alpha, X):
        X = _check_points(X, self.d)
        alpha = np.asarray(alpha, dtype=int)
        order = int(alpha.sum())
        r = np.linalg.norm(X, axis=1)
        f, f1, f2 = script_j_radial_derivs(r, self.d)
        if order == 0:
            return f.astype(complex)
        small = r < 1e-8
        rs = np.where(small, 1.0, r)
        U = X / rs[:, None]
        if order == 1:
            i = int(np.argmax(alpha))
            return np.where(small, 0.0, f1 * U[:, i]).astype(complex)
        if order == 2:
            idx = np.repeat(np.arange(self.d), alpha)
            i, j = int(idx[0]), int(idx[1])
            # f1/r -> f''(0) at the origin
            q = np.where(small, f2, f1 / rs)
            delta = 1.0 if i == j else 0.0
            val = (f2 - q) * U[:, i] * U[:, j] + q * delta
            return np.where(small, f2 * delta, val).astype(complex)
        return HelmholtzField(HerglotzDensity.constant(self.d)).derivative(alpha, X)


# least-squares density fit --------------------------------------------------

def fit_density(X, values, d: int, L: int) -> HerglotzDensity:
    """Least-squares Hermitian density of degree L matching samples of a real field."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = 2 * L + 1 if d == 2 else (L + 1) ** 2
    cols = []
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        p = HerglotzDensity._unchecked(d, L, e)
        cols.append(HelmholtzField(p)._fourier_bessel(p, X))
    A = np.stack(cols, axis=1)
    c, *_ = np.linalg.lstsq(A, np.asarray(values, dtype=complex), rcond=None)
    return HerglotzDensity.hermitize(d, L, c)


# dumps ----------------------------------------------------------------------

def write_csv(path, X, values) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    data = np.column_stack([X, np.real(values)])
    names = ["x", "y", "z"][: X.shape[1]] + ["value"]
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="")


def write_pgm(path, values2d) -> None:
    """8-bit binary PGM; min and max are recorded in a header comment."""
    v = np.asarray(np.real(values2d), dtype=float)
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    img = np.round(scaled * 255).astype(np.uint8)[::-1]
    header = f"P5\n# min {lo!r} max {hi!r}\n{img.shape[1]} {img.shape[0]}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(img.tobytes())
