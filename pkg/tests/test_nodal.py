import math

import numpy as np
import pytest

import frozen
from torus_localize.errors import DegenerateField, ResolutionTooCoarse
from torus_localize.nodal import extract_components, find_critical_points, sample_field
from torus_localize.spherical import Field, PlaneWaveField, ScriptJField


class Poly(Field):
    """Small analytic test fields given by callables for value and derivatives."""

    def __init__(self, d, fn):
        self.d, self.fn = d, fn

    def derivative(self, alpha, X):
        return self.fn(tuple(alpha), np.atleast_2d(X)).astype(complex)


def sphere_field(R0):
    def fn(a, X):
        if sum(a) == 0:
            return np.sum(X * X, axis=1) - R0 ** 2
        if sum(a) == 1:
            return 2 * X[:, int(np.argmax(a))]
        if sum(a) == 2:
            return np.full(len(X), 2.0 if max(a) == 2 else 0.0)
        return np.zeros(len(X))
    return fn


def test_constant_field_sampled_exactly():
    g = sample_field(Poly(2, lambda a, X: np.full(len(X), 3.0)), 1.0, 0.1)
    assert np.all(g.values == 3.0)


def test_positive_field_has_no_components():
    g = sample_field(Poly(2, lambda a, X: 1 + np.sum(X * X, axis=1)), 2.0, 0.1)
    assert extract_components(g) == []


def test_zero_field_is_degenerate():
    g = sample_field(Poly(2, lambda a, X: np.zeros(len(X))), 1.0, 0.1)
    with pytest.raises(DegenerateField):
        extract_components(g)


def test_coarse_resolution_rejected():
    with pytest.raises(ResolutionTooCoarse):
        sample_field(ScriptJField(2), 1.0, 0.2)


def test_circle_component():
    g = sample_field(Poly(2, sphere_field(1.3)), 2.0, 0.05)
    comps = extract_components(g)
    assert len(comps) == 1 and comps[0].closed
    assert comps[0].mean_radius == pytest.approx(1.3, abs=2e-3)
    assert comps[0].area == pytest.approx(math.pi * 1.69, rel=5e-3)


def test_open_curves_at_grid_boundary():
    g = sample_field(Poly(2, lambda a, X: X[:, 0] - 0.123), 1.0, 0.05)
    comps = extract_components(g)
    assert len(comps) == 1 and not comps[0].closed


def test_saddle_gives_two_crossing_curves():
    # x*y with an offset so the grid never hits the saddle exactly
    g = sample_field(Poly(2, lambda a, X: (X[:, 0] - 0.011) * (X[:, 1] + 0.017)), 1.0, 0.05)
    comps = extract_components(g)
    assert all(not c.closed for c in comps)
    assert len(comps) == 2   # the saddle cell pairs the four arms into two curves


def test_script_j_rings():
    g = sample_field(ScriptJField(2), 10.0, 0.05)
    comps = [c for c in extract_components(g, ball=9.0) if c.closed and c.inside_ball]
    radii = sorted(c.mean_radius for c in comps)
    assert len(radii) == 3
    assert radii == pytest.approx(list(frozen.J0_ZEROS), abs=0.01)
    assert max(c.circularity for c in comps) < 0.05


def test_component_count_stable_under_refinement():
    counts = []
    for h in (0.1, 0.05):
        g = sample_field(ScriptJField(2), 10.0, h)
        comps = extract_components(g, ball=9.0)
        counts.append(sum(1 for c in comps if c.closed and c.area >= 10 * h * h))
    assert counts[0] == counts[1] == 3


def test_sphere_3d_mesh():
    g = sample_field(Poly(3, sphere_field(0.8)), 1.2, 0.1)
    comps = extract_components(g)
    assert len(comps) == 1 and comps[0].closed and comps[0].euler == 2
    assert comps[0].mean_radius == pytest.approx(0.8, abs=0.01)


def test_critical_point_of_script_j():
    f = ScriptJField(2)
    g = sample_field(f, 1.0, 0.05)
    rep = find_critical_points(f, g)
    assert len(rep.points) == 1
    c = rep.points[0]
    assert c.kind == "max" and c.nondegenerate
    assert np.linalg.norm(c.location) < 1e-10
    assert c.value == pytest.approx(2 * math.pi)
    assert np.linalg.norm(f.gradient(c.location[None])[0]) <= 1e-10


def test_critical_points_of_cosine_product():
    # cos x cos y has a saddle at (pi/2, pi/2) and a max at 0
    xis = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    f = PlaneWaveField(xis, np.full(4, 0.25))
    g = sample_field(f, 2.0, 0.05)
    rep = find_critical_points(f, g, ball=2.3)
    kinds = {c.kind for c in rep.points}
    assert {"max", "saddle"} <= kinds
    for c in rep.points:
        assert c.grad_norm <= 1e-10
