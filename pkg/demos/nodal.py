"""Nodal set of a high-energy square-torus eigenfunction, seen at wavelength scale.

The rescaled eigenfunction is close to 2 pi J0 in C^2, so its zero set near the
origin is a family of near-circles at the Bessel zeros.

Run: python3 demos/nodal.py [out.pgm]
"""
import sys

from torus_localize.config import load_config
from torus_localize.localize import synthesize
from torus_localize.nodal import extract_components, find_critical_points, sample_field
from torus_localize.spherical import HerglotzDensity, write_pgm

spec = synthesize(load_config("q_sum2.toml").Q, 48612265, HerglotzDensity.constant(2))
f = spec.field()
grid = sample_field(f, 10.0, 0.05)

print(f"{len(spec.K)} lattice points on |k|^2 = 48612265")
for c in extract_components(grid, ball=9.0):
    if c.closed and c.inside_ball:
        print(f"  closed curve: mean radius {c.mean_radius:.4f}, circularity {c.circularity:.2e}")
print("  J0 zeros:     2.4048, 5.5201, 8.6537")

for c in find_critical_points(f, sample_field(f, 1.0, 0.05), ball=1.0).points:
    print(f"critical point {c.kind} at {c.location.round(12)}, value {c.value:.6f}")

if len(sys.argv) > 1:
    write_pgm(sys.argv[1], grid.values)
    print("raster written to", sys.argv[1])
