"""Genuine eigenspaces of an irrational torus versus frequency-window quasimodes.

For Q/4pi^2 = sqrt2 k1^2 + k2^2 every eigenspace has at most four directions,
so no eigenfunction matches J0 on the unit ball.  Mixing all frequencies in a
window |lambda^(1/2) - Lambda| <= eta Lambda removes that rigidity.

Run: python3 demos/obstruction_vs_quasimode.py
"""
from torus_localize.config import load_config
from torus_localize.localize import approximation_error, obstruction_scan, synthesize_quasimode
from torus_localize.spherical import HerglotzDensity, ScriptJField

cfg = load_config("sqrt2.toml")
J = ScriptJField(2)

rep = obstruction_scan(cfg.Q, J, 1e4)
print(f"{len(rep.levels)} strata up to lambda/4pi^2 = 1e4, at most {rep.sizes.max()} points each")
print(f"relative L2(B_1) distance: first stratum {rep.distances[0]:.3f}, minimum {rep.minimum:.4f}")
for w in rep.windows:
    print(f"  window [{w['M']:6.0f}, {w['hi']:6.0f}]  {w['count']:5d} strata  min {w['min']:.4f}")

print("\nquasimodes at Lambda = 200 (sup error on B_5):")
for eta in (0.2, 0.1, 0.05):
    spec = synthesize_quasimode(cfg.B, 200.0, eta, HerglotzDensity.constant(2))
    err = approximation_error(spec, J, 5.0).sup[0]
    print(f"  eta = {eta:4.2f}  {len(spec.K):5d} frequencies  error {err:.3f}")
