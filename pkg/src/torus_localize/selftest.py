"""Brute-force oracle checks over the shipped corpus."""
from __future__ import annotations

import math

import mpmath
import numpy as np

from .config import corpus_names, load_config
from .ellipsoid import binary_reduce, enumerate_level_set, gaussian_representations
from .form_arith import decompose, eigenspace_exact
from .lattice import brute_force_level
from .numtheory import FactoredInteger, r2
from .spherical import HerglotzDensity, HelmholtzField, bessel_j


def _check(name, fn):
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return {"name": name, "ok": bool(ok), "detail": detail}


def _enumeration():
    n_checked = 0
    for name in corpus_names():
        cfg = load_config(name)
        if not cfg.Q.is_integer() or cfg.d > 3:
            continue
        for n in range(0, 41):
            got = enumerate_level_set(cfg.Q, n).as_set()
            R = int(math.isqrt(int(n / np.linalg.eigvalsh(cfg.Q.matrix()).min()))) + 1
            if got != brute_force_level(cfg.Q, n, R):
                return False, f"{name} level {n}"
            n_checked += 1
    return True, f"{n_checked} levels"


def _lemma_splitting():
    rng = np.random.default_rng(7)
    count = 0
    for name in corpus_names():
        cfg = load_config(name)
        if cfg.d != 2:
            continue
        dec = decompose(cfg.Q)
        for _ in range(4):
            k0 = tuple(int(v) for v in rng.integers(-6, 7, 2))
            got = eigenspace_exact(cfg.Q, k0, R=12, decomposition=dec).as_set()
            ref = brute_force_level(cfg.Q, cfg.Q.value(k0), 12)
            if got != ref:
                return False, f"{name} k0={k0}"
            count += 1
    return True, f"{count} eigenspaces"


def _reduction():
    for name in corpus_names():
        cfg = load_config(name)
        if cfg.d == 2 and cfg.Q.is_integer() and not binary_reduce(cfg.Q).identity_holds():
            return False, name
    return True, "Q(TK) identity"


def _two_squares():
    for N in range(1, 400):
        f = FactoredInteger.of(N)
        total = r2(f.as_dict())
        if total == 0:
            continue
        reps = gaussian_representations(f)
        if len(reps.points) != total or any(a * a + b * b != N for a, b in reps.points):
            return False, f"N={N}"
    return True, "N < 400"


def _bessel():
    worst = 0.0
    with mpmath.workdps(50):
        for nu in (0, 0.5, 1, 2.5, 7):
            for x in (0.1, 1.0, 7.3, 40.0, 250.0):
                ref = float(mpmath.besselj(nu, x))
                worst = max(worst, abs(bessel_j(nu, x) - ref) / max(abs(ref), 1e-3))
    return worst < 1e-10, f"max rel err {worst:.2e}"


def _herglotz():
    worst = 0.0
    for d in (2, 3):
        p = HerglotzDensity.random(d, 4, seed=d)
        Xd = np.random.default_rng(d).uniform(-6, 6, (30, d))
        a = HelmholtzField(p).value(Xd)
        b = HelmholtzField(p, "quadrature").value(Xd)
        worst = max(worst, float(np.abs(a - b).max()))
    return worst < 1e-8, f"max diff {worst:.2e}"


def run_selftest(threads: int = 1) -> list[dict]:
    return [
        _check("enumerate_vs_brute_force", _enumeration),
        _check("eigenspace_splitting", _lemma_splitting),
        _check("binary_reduction_identity", _reduction),
        _check("two_squares_count", _two_squares),
        _check("bessel_vs_mpmath", _bessel),
        _check("herglotz_methods_agree", _herglotz),
    ]
