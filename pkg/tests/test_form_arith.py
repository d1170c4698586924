import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy

import frozen
from torus_localize import QuadraticForm, ScalarField
from torus_localize.config import load_config
from torus_localize.errors import ApproximateAmbiguity, FloatModeUnsupported
from torus_localize.form_arith import (decompose, diophantine_probe, eigenspace_exact,
                                       is_integer_multiple, multiplicity_scan)
from torus_localize.lattice import FOUR_PI2


def form(coeffs, rads=(), d=2, mode=None):
    mode = mode or ("quadirr" if rads else "rational")
    return QuadraticForm.from_coeffs(d, coeffs, ScalarField(mode, tuple(rads)), FOUR_PI2)


def test_integer_form_is_single_class():
    dec = decompose(form([1, 0, 1]))
    assert dec.m == 1 and dec.betas[0] == 1
    assert dec.integer_forms[0] == {(0, 0): 1, (1, 1): 1}


def test_sqrt2_splits_in_two():
    dec = decompose(form(["sqrt(2)", 0, 1], (2,)))
    assert dec.m == 2
    got = {str(b): f for b, f in zip(dec.betas, dec.integer_forms)}
    assert got == {"sqrt(2)": {(0, 0): 1}, "1": {(1, 1): 1}}


def test_gcd_normalization():
    dec = decompose(form(["3/2", 3, 6]))
    assert dec.m == 1 and dec.betas[0] == Fraction(3, 2)
    assert dec.integer_forms[0] == {(0, 0): 1, (0, 1): 2, (1, 1): 4}


def test_reconstruction_with_sympy():
    Q = form(["sqrt(2)", "sqrt(3)", "sqrt(5)"], (2, 3, 5))
    dec = decompose(Q)
    assert dec.m == 3 and dec.partitioned
    s2, s3, s5 = sympy.sqrt(2), sympy.sqrt(3), sympy.sqrt(5)
    rng = np.random.default_rng(0)
    for k in rng.integers(-1000, 1001, size=(20, 2)):
        k = tuple(int(v) for v in k)
        direct = s2 * k[0] ** 2 + s3 * k[0] * k[1] + s5 * k[1] ** 2
        assert sympy.expand(sympy.sympify(str(dec.reconstruct(k))) - direct) == 0


def test_dichotomy_examples():
    assert is_integer_multiple(form([1, 0, 1])).yes
    assert is_integer_multiple(form([1, 1, 1])).yes
    r = is_integer_multiple(form(["5/7", 0, "15/7"]))
    assert r.yes and r.beta == Fraction(5, 7)
    r = is_integer_multiple(form(["sqrt(2)", 0, 1], (2,)))
    assert not r.yes and r.decomposition.m == 2
    r = is_integer_multiple(form(["1 + sqrt(2)", 0, "2 + 2*sqrt(2)"], (2,)))
    assert r.yes and r.decomposition.m == 1


def test_float_mode_decomposition():
    Qf = form([2 ** 0.5, 0, 1], mode="float")
    assert decompose(Qf).m == 2 and decompose(Qf).approximate
    assert decompose(form([1.5, 3, 6], mode="float")).m == 1


def test_float_ambiguity_raises():
    # q22/q11 has a denominator beyond d_max, but q33 is a small multiple of both
    Q = QuadraticForm.from_coeffs(3, [1.0, 0, 0, 1000003 / 1000001, 0, 1000003.0],
                                  ScalarField("float"), FOUR_PI2)
    with pytest.raises(ApproximateAmbiguity):
        decompose(Q)


def test_eigenspace_examples():
    assert eigenspace_exact(form([1, 0, 1]), (3, 4)).as_set() == frozen.CIRCLE_25
    assert eigenspace_exact(form(["sqrt(2)", 0, 1], (2,)), (1, 2)).as_set() == frozen.SQRT2_K12
    assert eigenspace_exact(form(["sqrt(2)", 0, 1], (2,)), (0, 0)).as_set() == {(0, 0)}
    with pytest.raises(FloatModeUnsupported):
        eigenspace_exact(form([2 ** 0.5, 0, 1], mode="float"), (1, 2))


def _sympy_level(coeffs, k):
    c = [sympy.sympify(str(v)) for v in coeffs]
    return sympy.expand(c[0] * k[0] ** 2 + c[1] * k[0] * k[1] + c[2] * k[1] ** 2)


@pytest.mark.parametrize("coeffs,rads", [(["sqrt(2)", 0, 1], (2,)), (["2", "sqrt(3)", "3"], (3,)),
                                         (["sqrt(2)", "sqrt(3)", "sqrt(5)"], (2, 3, 5))])
def test_eigenspace_vs_sympy_brute_force(coeffs, rads):
    Q = form(coeffs, rads)
    R = 6
    box = list(itertools.product(range(-R, R + 1), repeat=2))
    vals = {k: _sympy_level(coeffs, k) for k in box}
    for k0 in [(1, 1), (2, -1), (0, 3), (3, 2)]:
        # distinct square roots of squarefree integers are independent, so expand is canonical
        want = {k for k in box if sympy.expand(vals[k] - vals[k0]) == 0}
        assert eigenspace_exact(Q, k0, R=R).as_set() == want


def test_multiplicity_sqrt2_at_first_four():
    Q = form(["sqrt(2)", 0, 1], (2,))
    mult, level = multiplicity_scan(Q, 10)
    # first reached at (+-1, +-1); the level 4 + sqrt 2 of (+-1, +-2) ties it
    assert mult == 4 and level == "1 + sqrt(2)"
    assert len(eigenspace_exact(Q, (1, 2)).points) == 4


def test_diophantine_three_radicals():
    rep = diophantine_probe(form(["sqrt(2)", "sqrt(3)", "sqrt(5)"], (2, 3, 5)), 40)
    assert rep.m == 3 and rep.max_multiplicity <= 4 and rep.bound_ok
    assert rep.margin > 0
    js = rep.as_json()
    assert js["lemma_bound"] == 4


def test_diophantine_rejects_rational_form():
    rep = diophantine_probe(form([1, 0, 1]), 5)
    assert rep.m == 1


def test_sqrt2_corpus_level():
    cfg = load_config("sqrt2.toml")
    assert eigenspace_exact(cfg.Q, (1, 2)).as_set() == frozen.SQRT2_K12
