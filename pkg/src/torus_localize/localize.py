"""Eigenfunctions whose rescalings approximate Helmholtz fields, and the obstruction.

Plane-wave sums ``v(x) = sum_k a_k exp(i x.xi_k)`` are the rescaled torus
eigenfunctions.  For integer forms the amplitudes sample a density on an
equidistributed level set; for irrational forms we measure how far every
eigenspace stays from a target field.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .ellipsoid import enumerate_level_set
from .errors import DecompositionMissing, EmptyStratum, EmptyWindow, ValidationError
from .form_arith import is_integer_multiple
from .lattice import FOUR_PI2, QuadraticForm, box_points
from .parallel import chunked_map
from .spherical import (Field, HerglotzDensity, PlaneWaveField, ball_rule, planewave_ball_gram,
                        real_sph_harm, sphere_rule)

MODES = ("paper", "jacobian", "fitted")
FIT_COND_MAX = 1e8
CHUNK = 4096


@dataclass
class EigenfunctionSpec:
    """Frequencies ``K`` (integer rows) with complex amplitudes.

    ``xis`` are the rescaled frequencies: unit vectors ``B k / |B k|`` for
    eigenfunctions, ``2 pi B k / Lambda`` for quasimodes.  ``lam`` is the
    common eigenvalue (or ``Lambda^2`` for a window).
    """

    B: np.ndarray
    K: np.ndarray
    amps: np.ndarray
    lam: float
    level: str | None = None
    mode: str = "paper"
    window: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.K = np.asarray(self.K, dtype=np.int64).reshape(-1, self.B.shape[0])
        self.amps = np.asarray(self.amps, dtype=complex)

    @property
    def d(self) -> int:
        return self.B.shape[0]

    @property
    def xis(self) -> np.ndarray:
        V = self.K @ self.B.T
        if self.window is None:
            return V / np.linalg.norm(V, axis=1)[:, None]
        return 2 * np.pi * V / math.sqrt(self.lam)

    def eigenvalues(self) -> np.ndarray:
        return FOUR_PI2 * np.sum((self.K @ self.B.T) ** 2, axis=1)

    def field(self) -> PlaneWaveField:
        return PlaneWaveField(self.xis, self.amps)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "B": self.B.tolist(),
            "lambda": self.lam,
            "level": self.level,
            "mode": self.mode,
            "window": list(self.window) if self.window else None,
            "frequencies": self.K.tolist(),
            "amplitudes": [[a.real, a.imag] for a in self.amps],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EigenfunctionSpec":
        try:
            amps = np.array([complex(a, b) for a, b in obj["amplitudes"]])
            return cls(np.array(obj["B"]), np.array(obj["frequencies"]), amps,
                       float(obj["lambda"]), obj.get("level"), obj.get("mode", "paper"),
                       tuple(obj["window"]) if obj.get("window") else None,
                       obj.get("meta", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed eigenfunction spec: {exc}") from exc

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "EigenfunctionSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _symmetrize(K, amps):
    """Enforce ``a(-k) = conj a(k)``."""
    index = {tuple(k): i for i, k in enumerate(K.tolist())}
    partner = np.array([index.get(tuple(-v for v in k), -1) for k in K.tolist()])
    if np.any(partner < 0):
        raise ValidationError("frequency set is not symmetric under k -> -k")
    return 0.5 * (amps + np.conj(amps[partner]))


def ellipsoid_area(Bt: np.ndarray, n_nodes: int | None = None) -> float:
    """Surface measure of ``{eta : |Bt eta| = 1}``.

    Pulled back to the sphere the integrand is ``|Bt^T u| / |det Bt|``,
    which is analytic, so the periodic rule converges geometrically.
    """
    d = Bt.shape[0]
    if d == 2:
        xi, w = sphere_rule(2, n_nodes or 2048)
    elif d == 3:
        xi, w = sphere_rule(3, n_nodes or 160)
    else:
        # d = 4: Gaussian sampling with a fixed seed; used only for weights
        rng = np.random.default_rng(0)
        g = rng.standard_normal((200000, 4))
        xi = g / np.linalg.norm(g, axis=1)[:, None]
        w = np.full(len(xi), 2 * np.pi ** 2 / len(xi))
    return float(np.sum(w * np.linalg.norm(xi @ Bt, axis=1)) / abs(np.linalg.det(Bt)))


def pointwise_jacobian(Bt: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """``dsigma(xi) / dsigma_E(eta)`` at ``xi = Bt eta``: ``|det Bt| / |Bt^T xi|``."""
    return abs(np.linalg.det(Bt)) / np.linalg.norm(xis @ Bt, axis=1)


def _sphere_basis(d: int, L: int, xis: np.ndarray):
    """Real harmonic basis up to degree L and its exact sphere integrals."""
    if d == 2:
        th = np.arctan2(xis[:, 1], xis[:, 0])
        cols = [np.ones(len(xis))]
        for l in range(1, L + 1):
            cols += [np.cos(l * th), np.sin(l * th)]
        A = np.stack(cols)
        b = np.zeros(len(A))
        b[0] = 2 * np.pi
        return A, b
    if d == 3:
        A = real_sph_harm(L, xis).T
        b = np.zeros(len(A))
        b[0] = math.sqrt(4 * math.pi)
        return A, b
    raise ValidationError("fitted weights are available for d = 2, 3")


def fitted_weights(xis, w0, L_fit: int):
    """Least-norm correction of ``w0`` integrating harmonics of degree <= L_fit exactly."""
    d = xis.shape[1]
    A, b = _sphere_basis(d, L_fit, xis)
    s = np.linalg.svd(A, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if cond > FIT_COND_MAX:
        return None, cond, math.inf
    w = w0 + np.linalg.lstsq(A, b - A @ w0, rcond=None)[0]
    resid = float(np.abs(A @ w - b).max())
    return w, cond, resid


def default_fit_degree(d: int, count: int) -> int:
    """Largest degree whose harmonic count stays below half the nodes (capped at 16)."""
    L = 0
    while L < 16:
        nxt = 2 * (L + 1) + 1 if d == 2 else (L + 2) ** 2
        if nxt > count // 2:
            break
        L += 1
    return L


def synthesize(Q: QuadraticForm, n: int, p: HerglotzDensity, mode: str = "paper",
               B=None, points=None, L_fit: int | None = None, threads: int = 1) -> EigenfunctionSpec:
    """Rescaled eigenfunction ``sum_k w_k p(xi_k) exp(i x.xi_k)`` over ``Q1(k) = n``.

    ``Q`` must be a multiple ``beta Q1`` of an integer form; ``n`` is a level of
    ``Q1`` and the eigenvalue is ``4 pi^2 beta n`` (with ``Q`` in units of
    ``4 pi^2``).  ``B`` is the dual basis, ``|B k|^2 = Q(k)``.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown weight mode {mode!r}")
    res = is_integer_multiple(Q)
    if not res.yes:
        raise ValidationError("synthesize needs a multiple of an integer form")
    beta = float(res.beta)
    Q1 = res.integer_form
    B = Q.dual_matrix() if B is None else np.asarray(B, dtype=float)
    if points is None:
        points = enumerate_level_set(Q1, int(n), threads=threads).points
    K = np.asarray(points, dtype=np.int64).reshape(-1, Q.d)
    if len(K) == 0:
        raise EmptyStratum(f"no integer points on level {n}")
    if p.d != Q.d:
        raise ValidationError("density dimension does not match the form")
    Bt = B / math.sqrt(beta)  # maps {Q1 = 1} onto the unit sphere
    V = K @ Bt.T
    if not np.allclose(np.sum(V * V, axis=1), n, rtol=1e-9):
        raise ValidationError("dual basis does not match the form")
    xis = V / np.linalg.norm(V, axis=1)[:, None]
    area = ellipsoid_area(Bt)
    const = abs(np.linalg.det(Bt)) * area / len(K)
    jac = pointwise_jacobian(Bt, xis) * area / len(K)
    meta = {
        "beta": str(res.beta), "count": len(K), "ellipsoid_area": area,
        "paper_constant": float(const),
        "jacobian_min": float(jac.min()), "jacobian_max": float(jac.max()),
    }
    used = mode
    if mode == "paper":
        w = np.full(len(K), const)
    elif mode == "jacobian":
        w = jac
    else:
        L_fit = default_fit_degree(Q.d, len(K)) if L_fit is None else int(L_fit)
        w, cond, resid = fitted_weights(xis, jac, L_fit)
        meta.update({"L_fit": L_fit, "fit_condition": cond, "fit_residual": resid})
        if w is None:
            warnings.warn(f"fitted weights ill-conditioned (cond {cond:.2e}); using jacobian")
            w, used = jac, "jacobian"
    meta["weights_mode"] = used
    amps = _symmetrize(K, w * p(xis))
    lam = FOUR_PI2 * beta * int(n)
    return EigenfunctionSpec(B, K, amps, lam, str(n), mode, None, meta)


def spec_from_stratum(B, points, density: HerglotzDensity | None = None, amps=None,
                      weight: float | None = None) -> EigenfunctionSpec:
    """Eigenfunction over an arbitrary stratum (equal weights unless amps given)."""
    B = np.asarray(B, dtype=float)
    K = np.asarray(points, dtype=np.int64).reshape(-1, B.shape[0])
    if len(K) == 0:
        raise EmptyStratum("empty stratum")
    lams = FOUR_PI2 * np.sum((K @ B.T) ** 2, axis=1)
    if np.ptp(lams) > 1e-9 * lams.max():
        raise ValidationError("points do not share one eigenvalue")
    V = K @ B.T
    xis = V / np.linalg.norm(V, axis=1)[:, None]
    if amps is None:
        sigma = 2 * np.pi if B.shape[0] == 2 else 4 * np.pi
        w = sigma / len(K) if weight is None else weight
        amps = w * (density(xis) if density is not None else np.ones(len(K)))
    amps = _symmetrize(K, np.asarray(amps, dtype=complex))
    return EigenfunctionSpec(B, K, amps, float(lams[0]), None, "stratum")


def eval_rescaled(spec: EigenfunctionSpec, x, alpha=None) -> np.ndarray:
    """Real part of ``d^alpha v`` at the points ``x``."""
    alpha = (0,) * spec.d if alpha is None else alpha
    return spec.field().derivative(alpha, x).real


def multi_indices(d: int, order: int) -> list[tuple[int, ...]]:
    if d == 1:
        return [(order,)]
    return [(a,) + rest for a in range(order, -1, -1) for rest in multi_indices(d - 1, order - a)]


def ball_grid(d: int, R: float):
    """Cubic grid of ``(2 ceil(8R) + 1)^d`` points restricted to the ball."""
    m = int(math.ceil(8 * R))
    ax = np.linspace(-R, R, 2 * m + 1)
    G = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    inside = np.sum(G * G, axis=1) <= R * R * (1 + 1e-12)
    return G[inside], (ax[1] - ax[0]) ** d


@dataclass(frozen=True)
class ApproximationError:
    sup: list
    l2: float
    grid_points: int

    @property
    def c_l(self) -> float:
        return max(self.sup)

    def as_json(self) -> dict:
        return {"sup_by_order": self.sup, "c_l": self.c_l, "l2": self.l2,
                "grid_points": self.grid_points}


def field_cl_norm(f: Field, R: float, l: int, threads: int = 1) -> float:
    """``max_{|alpha| <= l} sup_{B_R} |d^alpha f|`` on the standard grid."""
    X, _ = ball_grid(f.d, R)
    best = 0.0
    for order in range(l + 1):
        for a in multi_indices(f.d, order):
            best = max(best, float(np.abs(_eval_chunks(f, a, X, threads).real).max()))
    return best


def _eval_chunks(f: Field, alpha, X, threads):
    chunks = [X[s:s + CHUNK] for s in range(0, len(X), CHUNK)]
    return np.concatenate(chunked_map(lambda c: f.derivative(alpha, c), chunks, threads))


def approximation_error(spec, target: Field, R: float, l: int = 0,
                        threads: int = 1) -> ApproximationError:
    """Sup norms of ``d^alpha (v - h)`` per order ``|alpha| <= l`` and the L^2(B_R) error."""
    if l > 4 or R > 20:
        raise ValidationError("approximation_error supports l <= 4 and R <= 20")
    v = spec.field() if isinstance(spec, EigenfunctionSpec) else spec
    X, cell = ball_grid(v.d, R)
    sup = []
    l2 = 0.0
    for order in range(l + 1):
        worst = 0.0
        for a in multi_indices(v.d, order):
            diff = (_eval_chunks(v, a, X, threads) - _eval_chunks(target, a, X, threads)).real
            worst = max(worst, float(np.abs(diff).max()))
            if order == 0:
                l2 = math.sqrt(float(np.sum(diff * diff)) * cell)
        sup.append(worst)
    return ApproximationError(sup, l2, len(X))


# obstruction ----------------------------------------------------------------

def _ball_nodes(d: int, R: float):
    if d == 2:
        return ball_rule(2, R, max(24, int(6 * R) + 16), max(48, int(8 * R) + 40))
    return ball_rule(d, R, max(16, int(4 * R) + 12), max(24, int(4 * R) + 20))


@dataclass(frozen=True)
class StratumDistance:
    distance: float
    amplitudes: np.ndarray
    relative: float


def _distance(G, c, E, h_nodes, W, norm_h):
    ev, V = np.linalg.eigh(G)
    keep = ev > 1e-12 * max(ev.max(), 0.0)
    alpha = V[:, keep] @ ((V[:, keep].conj().T @ c) / ev[keep])
    resid = h_nodes - E @ alpha
    dist = math.sqrt(float(np.sum(W * np.abs(resid) ** 2)))
    return StratumDistance(dist, alpha, dist / norm_h if norm_h else math.inf)


def eigenspace_distance(xis, target: Field, R: float) -> StratumDistance:
    """``min_alpha || h - sum alpha_a exp(i xi_a.x) ||_{L^2(B_R)}``."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if len(xis) > 1000:
        raise ValidationError("eigenspace_distance handles at most 1000 directions")
    X, W = _ball_nodes(xis.shape[1], R)
    h = target.value(X)
    E = np.exp(1j * X @ xis.T)
    c = (W * h) @ E.conj()
    G = planewave_ball_gram(xis, R)
    norm_h = math.sqrt(float(np.sum(W * np.abs(h) ** 2)))
    return _distance(G, c, E, h, W, norm_h)


@dataclass(frozen=True)
class ObstructionReport:
    levels: np.ndarray        # lambda / 4 pi^2 per stratum
    sizes: np.ndarray
    distances: np.ndarray
    norm_h: float
    windows: list

    @property
    def minimum(self) -> float:
        return float(self.distances.min())

    def as_json(self) -> dict:
        i = int(np.argmin(self.distances))
        return {
            "strata": int(len(self.levels)),
            "min_distance": self.minimum,
            "argmin_level": float(self.levels[i]),
            "first_distance": float(self.distances[np.argmin(self.levels)]),
            "norm_target": self.norm_h,
            "max_multiplicity": int(self.sizes.max()),
            "windows": self.windows,
        }


def window_minima(levels, distances, lam_max: float, start: float = 100.0):
    """Minima of the distance over ``[M, 2M]`` for ``M = start * 2^i`` (clipped at lam_max)."""
    out = []
    M = start
    while M < lam_max:
        hi = min(2 * M, lam_max)
        sel = (levels >= M) & (levels <= hi)
        out.append({"M": M, "hi": hi, "count": int(sel.sum()),
                    "min": float(distances[sel].min()) if sel.any() else None})
        M *= 2
    return out


def strata_up_to(Q: QuadraticForm, lam_max: float):
    """All nonzero strata with ``Q(k) <= lam_max`` (Q in its own units), grouped exactly."""
    Sinv = np.linalg.inv(Q.matrix())
    R = int(math.floor(math.sqrt(lam_max * Sinv.diagonal().max()))) + 1
    K = box_points(Q.d, R)
    vals = Q.values_float(K)
    sel = (vals <= lam_max * (1 + 1e-12)) & np.any(K != 0, axis=1)
    K, vals = K[sel], vals[sel]
    if Q.field.exact:
        keys = Q.exact_keys(K)
        if keys.dtype == object:
            raise ValidationError("scan too large for exact grouping")
    else:
        keys = np.round(vals / Q.field.eps_eq).astype(np.int64)[:, None]
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    order = np.lexsort((inv,))
    groups = np.split(order, np.nonzero(np.diff(inv[order]))[0] + 1)
    groups.sort(key=lambda g: (vals[g[0]], tuple(K[g[0]])))
    return K, vals, groups


def obstruction_scan(Q: QuadraticForm, target: Field, lam_max: float, R: float = 1.0,
                     B=None, threads: int = 1) -> ObstructionReport:
    """Eigenspace distance to ``target`` for every stratum with ``lambda/4pi^2 <= lam_max``."""
    B = Q.dual_matrix() if B is None else np.asarray(B, dtype=float)
    K, vals, groups = strata_up_to(Q, lam_max)
    V = K @ B.T
    xis = V / np.linalg.norm(V, axis=1)[:, None]
    X, W = _ball_nodes(Q.d, R)
    h = target.value(X)
    norm_h = math.sqrt(float(np.sum(W * np.abs(h) ** 2)))
    batches = [groups[s:s + 256] for s in range(0, len(groups), 256)]

    def run(batch):
        out = []
        for g in batch:
            E = np.exp(1j * X @ xis[g].T)
            c = (W * h) @ E.conj()
            out.append(_distance(planewave_ball_gram(xis[g], R), c, E, h, W, norm_h).distance)
        return out

    dists = np.array([v for part in chunked_map(run, batches, threads) for v in part])
    levels = np.array([vals[g[0]] for g in groups])
    sizes = np.array([len(g) for g in groups])
    return ObstructionReport(levels, sizes, dists, norm_h, window_minima(levels, dists, lam_max))


# the operator L = P(-i grad) ------------------------------------------------

@dataclass(frozen=True)
class LOperatorReport:
    residual: float
    c_n: float
    bound: float

    def as_json(self) -> dict:
        return {"residual": self.residual, "c_n": self.c_n, "bound": self.bound}


def _coeff_matrix(Q1, d: int) -> np.ndarray:
    if isinstance(Q1, QuadraticForm) or hasattr(Q1, "matrix"):
        return np.asarray(Q1.matrix(), dtype=float)
    if isinstance(Q1, dict):
        S = np.zeros((d, d))
        for (i, j), c in Q1.items():
            if i == j:
                S[i, i] = c
            else:
                S[i, j] = S[j, i] = c / 2
        return S
    raise DecompositionMissing("designate Q1 as an integer form or coefficient map")


def l_operator_probe(spec: EigenfunctionSpec, Q1, R: float = 1.0) -> LOperatorReport:
    """``max |L v - c_n v|`` on the grid of B_R, with ``P(xi) = Q1(B^{-1} xi)``.

    On a stratum ``P(xi_k) = Q1(k) / (Q(k)/4pi^2)`` is the same for every k.
    """
    if Q1 is None:
        raise DecompositionMissing("no integer piece Q1 given")
    M1 = _coeff_matrix(Q1, spec.d)
    Binv = np.linalg.inv(spec.B)
    xis = spec.xis
    eta = xis @ Binv.T
    P = np.einsum("ni,ij,nj->n", eta, M1, eta)
    k0 = spec.K[0]
    c_n = float(k0 @ M1 @ k0) / float(np.sum((spec.B @ k0) ** 2))
    X, _ = ball_grid(spec.d, R)
    E = np.exp(1j * X @ xis.T)
    resid = float(np.abs(E @ (spec.amps * (P - c_n))).max())
    S = spec.B.T @ spec.B
    ev = linalg.eigh(M1, S, eigvals_only=True)
    return LOperatorReport(resid, c_n, float(np.abs(ev).max()))


# quasimodes -----------------------------------------------------------------

def synthesize_quasimode(B, Lambda: float, eta: float, p: HerglotzDensity) -> EigenfunctionSpec:
    """Window sum over ``sqrt(4 pi^2 |B k|^2) in [(1-eta) Lambda, (1+eta) Lambda]``.

    Frequencies are rescaled by the window centre, ``xi_k = 2 pi B k / Lambda``,
    and amplitudes are ``p(xi_k/|xi_k|) sigma(S^{d-1}) / #window``.
    """
    if not (0 < eta < 0.5):
        raise ValidationError("eta must lie in (0, 1/2)")
    if Lambda <= 0:
        raise ValidationError("Lambda must be positive")
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    lo, hi = ((1 - eta) * Lambda) ** 2, ((1 + eta) * Lambda) ** 2
    Sinv = np.linalg.inv(FOUR_PI2 * B.T @ B)
    R = int(math.floor(math.sqrt(hi * Sinv.diagonal().max()))) + 1
    K = box_points(d, R)
    lams = FOUR_PI2 * np.sum((K @ B.T) ** 2, axis=1)
    sel = (lams >= lo) & (lams <= hi)
    K = K[sel]
    if len(K) == 0:
        raise EmptyWindow(f"no dual-lattice frequencies in [{lo:.6g}, {hi:.6g}]")
    V = 2 * np.pi * K @ B.T / Lambda
    u = V / np.linalg.norm(V, axis=1)[:, None]
    sigma = 2 * np.pi if d == 2 else 4 * np.pi if d == 3 else 2 * np.pi ** 2
    amps = _symmetrize(K, p(u) * sigma / len(K))
    meta = {"count": int(len(K)), "eta": eta, "Lambda": Lambda}
    return EigenfunctionSpec(B, K, amps, Lambda ** 2, None, "quasimode", (lo, hi), meta)


def in_window(spec: EigenfunctionSpec) -> np.ndarray:
    lo, hi = spec.window
    lams = spec.eigenvalues()
    return (lams >= lo) & (lams <= hi)
