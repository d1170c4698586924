"""Eigenfunctions of the square torus converging to 2 pi J0 on a fixed ball.

Each level n is a product of split primes, so the circle |k|^2 = n carries many
lattice points and the rescaled cosine sum resolves the Bessel profile.

Run: python3 demos/convergence.py
"""
import math

from torus_localize.config import load_config
from torus_localize.localize import approximation_error, synthesize
from torus_localize.spherical import HerglotzDensity, ScriptJField

Q = load_config("q_sum2.toml").Q
J = ScriptJField(2)
one = HerglotzDensity.constant(2)

print(f"{'level':>10s} {'points':>7s}  " + "  ".join(f"{m:>9s}" for m in ("paper", "jacobian", "fitted")))
for n in (5, 65, 1105, 32045, 1185665, 48612265):
    errs, count = [], 0
    for mode in ("paper", "jacobian", "fitted"):
        spec = synthesize(Q, n, one, mode=mode)
        count = len(spec.K)
        errs.append(approximation_error(spec, J, 5.0).sup[0])
    print(f"{n:10d} {count:7d}  " + "  ".join(f"{e:9.2e}" for e in errs))
print(f"\ntarget: sup error <= 0.05 * 2 pi = {0.1 * math.pi:.3f} on B_5")
