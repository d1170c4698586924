"""Which flat tori have integer spectra (up to scale), and what that does to multiplicity.

Run: python3 demos/dichotomy.py
"""
from torus_localize.config import corpus_names, load_config
from torus_localize.form_arith import is_integer_multiple, multiplicity_scan

print(f"{'form':22s} {'coefficients':34s} {'m':>2s}  {'max mult (|k|<=25)':>18s}")
for name in corpus_names():
    cfg = load_config(name)
    if cfg.d != 2:
        continue
    res = is_integer_multiple(cfg.Q)
    mult, level = multiplicity_scan(cfg.Q, 25)
    coeffs = ", ".join(str(c) for c in cfg.Q.coeffs())
    print(f"{name:22s} [{coeffs:32s}] {res.decomposition.m:2d}  {mult:>6d} at {level}")

# integer multiples carry arbitrarily large eigenspaces; the others stay at <= 4
print("\ninteger multiples:   multiplicity grows with the box")
print("irrational classes:  multiplicity capped, here never above 4")
