"""Property tests for the structural invariants."""
import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

import oracles
from torus_localize import ScalarField, Surd, gram_form
from torus_localize.config import corpus_names, load_config
from torus_localize.ellipsoid import (binary_reduce, cc_sequence, enumerate_level_set,
                                      gaussian_representations, integer_form)
from torus_localize.form_arith import decompose
from torus_localize.lattice import FOUR_PI2, box_points
from torus_localize.localize import in_window, synthesize, synthesize_quasimode
from torus_localize.nodal import find_critical_points, sample_field
from torus_localize.numtheory import FactoredInteger
from torus_localize.spherical import HelmholtzField, HerglotzDensity

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])

EXACT_FORMS = [load_config(n) for n in corpus_names()
               if load_config(n).field.exact and load_config(n).Q.field.exact]


@st.composite
def float_bases(draw, d=None):
    d = d or draw(st.integers(2, 4))
    M = np.array(draw(st.lists(st.floats(-2, 2), min_size=d * d, max_size=d * d))).reshape(d, d)
    M = M + 3 * np.eye(d)
    assume(abs(np.linalg.det(M)) > 0.1)
    return M


@st.composite
def pd_binary(draw, bound=50):
    a = draw(st.integers(1, bound))
    c = draw(st.integers(1, bound))
    b = draw(st.integers(-bound, bound))
    assume(4 * a * c - b * b > 0)
    return [a, b, c]


@FAST
@given(float_bases(), st.data())
def test_gram_value_is_dual_norm(B, data):
    Q = gram_form(B, ScalarField("float"))
    K = np.array(data.draw(st.lists(st.lists(st.integers(-30, 30), min_size=len(B), max_size=len(B)),
                                    min_size=1, max_size=20)))
    lhs = FOUR_PI2 * Q.values_float(K)
    rhs = FOUR_PI2 * np.sum((K @ B.T) ** 2, axis=1)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


@FAST
@given(st.integers(-3, 3), st.integers(-3, 3), st.booleans())
def test_unimodular_change_keeps_spectrum(s, t, swap):
    A = np.array([[1.0, 0.3], [0.2, 1.7]])
    U = np.array([[1, s], [0, 1]]) @ np.array([[1, 0], [t, 1]])
    if swap:
        U = U[::-1]
    vals = []
    T = 12.0
    # basis vectors are the columns of A (A^T B = I), so a change of basis is A -> A U
    for M in (A, A @ U):
        B = np.linalg.inv(M.T)
        S = B.T @ B
        R = int(math.sqrt(T * np.linalg.inv(S).diagonal().max())) + 1
        K = box_points(2, R)
        v = np.einsum("ni,ij,nj->n", K, S, K)
        vals.append(np.sort(v[v <= T]))
    assert len(vals[0]) == len(vals[1]) and np.allclose(vals[0], vals[1], atol=1e-9)


@FAST
@given(st.sampled_from(EXACT_FORMS), st.data())
def test_positive_on_nonzero_vectors(cfg, data):
    k = data.draw(st.lists(st.integers(-20, 20), min_size=cfg.d, max_size=cfg.d))
    assume(any(k))
    assert cfg.Q.value(k).sign() > 0


@FAST
@given(st.sampled_from(EXACT_FORMS), st.data())
def test_reconstruction_and_partition(cfg, data):
    dec = decompose(cfg.Q)
    k = data.draw(st.lists(st.integers(-1000, 1000), min_size=cfg.d, max_size=cfg.d))
    assert dec.reconstruct(k) == cfg.Q.value(k)
    if dec.partitioned:
        flat = [p for part in dec.parts for p in part]
        assert len(flat) == len(set(flat)) and set(flat) == set(dec.index_set)


@FAST
@given(pd_binary(bound=6), st.integers(0, 2000))
def test_binary_enumeration_vs_brute_force(coeffs, n):
    Q = integer_form(coeffs)
    R = int(math.sqrt(n / np.linalg.eigvalsh(Q.matrix()).min())) + 1
    r = np.arange(-R, R + 1)
    K = np.stack(np.meshgrid(r, r, indexing="ij"), -1).reshape(-1, 2)
    v = coeffs[0] * K[:, 0] ** 2 + coeffs[1] * K[:, 0] * K[:, 1] + coeffs[2] * K[:, 1] ** 2
    want = {tuple(int(x) for x in k) for k in K[v == n]}
    assert enumerate_level_set(Q, n).as_set() == want


@SLOW
@given(st.integers(0, 10 ** 4))
def test_ternary_enumeration_vs_brute_force(n):
    Q = integer_form([1, 0, 0, 1, 0, 1])
    R = math.isqrt(n) + 1
    r = np.arange(-R, R + 1)
    K = np.stack(np.meshgrid(r, r, r, indexing="ij"), -1).reshape(-1, 3)
    want = {tuple(int(x) for x in k) for k in K[np.sum(K * K, axis=1) == n]}
    assert enumerate_level_set(Q, n).as_set() == want


@FAST
@given(st.integers(1, 10 ** 6))
def test_two_squares_multiplicativity(N):
    f = FactoredInteger.of(N).as_dict()
    if any(p % 4 == 3 and e % 2 for p, e in f.items()):
        assert enumerate_level_set(integer_form([1, 0, 1]), N).points.shape[0] == 0
        return
    want = 4 * math.prod(e + 1 for p, e in f.items() if p % 4 == 1)
    reps = gaussian_representations(FactoredInteger.of(N))
    assert reps.total == want == len(reps.points)
    assert set(reps.points) == enumerate_level_set(integer_form([1, 0, 1]), N).as_set()


@FAST
@given(pd_binary())
def test_reduction_identity(coeffs):
    r = binary_reduce(integer_form(coeffs))
    assert r.identity_holds()
    assert oracles.pullback_is_zero(r.q11, r.q12, r.q22, r.T, r.p, r.q)


def test_cc_sequence_increasing_and_split():
    a, b = cc_sequence(1, 1), cc_sequence(1, 2)
    assert b.value > a.value and b.value % a.value == 0
    assert all(p == 2 or p % 4 == 1 for p, _ in b.factored.factors)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 8), st.integers(0, 10 ** 6))
def test_helmholtz_residual_and_methods(d, L, seed):
    p = HerglotzDensity.random(d, L, seed)
    X = np.random.default_rng(seed).uniform(-10, 10, size=(20, d)) / math.sqrt(d)
    fb, qd = HelmholtzField(p), HelmholtzField(p, "quadrature")
    assert np.abs(fb.value(X) - qd.value(X)).max() <= 1e-8
    assert np.abs(fb.value(X).imag).max() <= 1e-12
    h = 1e-3
    lap = sum((fb.value(X + h * e) - 2 * fb.value(X) + fb.value(X - h * e)) / h ** 2 for e in np.eye(d))
    assert np.abs(lap + fb.value(X)).max() <= 1e-6


@FAST
@given(st.sampled_from([2, 3]), st.integers(0, 6), st.integers(0, 10 ** 6))
def test_density_text_round_trip(d, L, seed):
    p = HerglotzDensity.random(d, L, seed)
    assert np.array_equal(HerglotzDensity.from_text(p.to_text()).coeffs, p.coeffs)


@FAST
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 9)), min_size=1, max_size=4),
       st.lists(st.sampled_from([1, 2, 3, 5, 6, 7]), min_size=1, max_size=4))
def test_surd_text_round_trip(parts, rads):
    v = Surd.rational(0)
    for (a, b), s in zip(parts, rads):
        v = v + Surd.rational(Fraction(a, b)) * Surd.sqrt_of(s)
    F = ScalarField("quadirr", (2, 3, 5, 6, 7))
    assert F.parse(str(v)) == v


@SLOW
@given(st.sampled_from([5, 65, 1105, 32045]), st.sampled_from(["paper", "jacobian", "fitted"]),
       st.integers(0, 4), st.integers(0, 1000))
def test_synthesized_specs_are_real(n, mode, L, seed):
    Q = load_config("q_sum2.toml").Q
    spec = synthesize(Q, n, HerglotzDensity.random(2, L, seed), mode=mode)
    X = np.random.default_rng(seed).uniform(-5, 5, size=(200, 2))
    assert np.abs(spec.field().value(X).imag).max() <= 1e-12
    assert len(set(spec.eigenvalues().round(6))) == 1


@FAST
@given(st.floats(60, 250), st.floats(0.05, 0.3))
def test_quasimode_frequencies_in_window(Lambda, eta):
    B = load_config("sqrt2.toml").B
    try:
        spec = synthesize_quasimode(B, Lambda, eta, HerglotzDensity.constant(2))
    except Exception:
        assume(False)
    lo, hi = ((1 - eta) * Lambda) ** 2, ((1 + eta) * Lambda) ** 2
    lams = FOUR_PI2 * np.sum((spec.K @ B.T) ** 2, axis=1)
    assert np.all(in_window(spec)) and np.all((lams >= lo) & (lams <= hi))


@SLOW
@given(st.integers(0, 10 ** 6))
def test_critical_points_reverify(seed):
    f = HelmholtzField(HerglotzDensity.random(2, 3, seed))
    g = sample_field(f, 2.0, 0.05)
    for c in find_critical_points(f, g).points:
        assert np.linalg.norm(f.gradient(c.location[None])[0].real) <= 1e-10
