import math
from fractions import Fraction

import numpy as np
import pytest

from torus_localize import Lattice, QuadraticForm, ScalarField, Surd, direction, dual_basis, eigenvalue, gram_form
from torus_localize.errors import FieldError, NotPositiveDefinite, SingularBasis, ZeroVector
from torus_localize.lattice import FOUR_PI2, brute_force_level, box_points

Q2 = ScalarField("quadirr", (2,))


def test_dual_of_identity_and_diagonal():
    assert dual_basis([[1, 0], [0, 1]]) == ((1, 0), (0, 1))
    B = dual_basis([[2, 0], [0, 1]])
    assert B[0][0] == Fraction(1, 2) and B[1][1] == 1


def test_dual_shear_satisfies_ABt():
    A = [[1, 1], [0, 1]]
    B = dual_basis(A)
    assert [[int(B[i][j].to_fraction()) for j in range(2)] for i in range(2)] == [[1, 0], [-1, 1]]
    Af = np.array(A, float)
    Bf = np.array([[float(v) for v in r] for r in B])
    assert np.array_equal(Af @ Bf.T, np.eye(2))


def test_singular_basis_rejected():
    with pytest.raises(SingularBasis):
        dual_basis([[1, 2], [2, 4]])
    with pytest.raises(SingularBasis):
        Lattice(((1.0, 2.0), (1.0, 2.0 + 1e-15)), ScalarField("float"))


def test_gram_identity_form():
    Q = gram_form([[1, 0], [0, 1]])
    # |(3, 4)|^2 = 25
    assert eigenvalue(Q, (3, 4)) == pytest.approx(25 * FOUR_PI2, rel=1e-15)
    assert eigenvalue(Q, (0, 0)) == 0


def test_gram_float_fourth_root():
    B = np.diag([2 ** 0.25, 1.0])
    Q = gram_form(B, ScalarField("float"))
    c = Q.coeffs()
    assert c[0] == pytest.approx(math.sqrt(2), rel=1e-15) and c[1] == 0 and c[2] == 1


def test_exact_value_of_sqrt2_form():
    Q = QuadraticForm.from_coeffs(2, ["sqrt(2)", 0, 1], Q2, FOUR_PI2)
    v = eigenvalue(Q, (1, 2), exact=True)
    assert v == Surd.sqrt_of(2) + Surd.rational(4)
    assert eigenvalue(Q, (1, 2)) == pytest.approx(FOUR_PI2 * (math.sqrt(2) + 4))


def test_random_dual_matches_direct_evaluation():
    rng = np.random.default_rng(3)
    for _ in range(5):
        B = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        Q = gram_form(B, ScalarField("float"))
        K = rng.integers(-20, 21, size=(100, 3))
        lhs = FOUR_PI2 * Q.values_float(K)
        rhs = FOUR_PI2 * np.sum((K @ B.T) ** 2, axis=1)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


def test_direction():
    assert np.allclose(direction(np.eye(2), (0, 5)), [0, 1])
    assert np.allclose(direction(np.diag([1, 2]), (1, 1)), np.array([1, 2]) / math.sqrt(5))
    with pytest.raises(ZeroVector):
        direction(np.eye(2), (0, 0))


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        QuadraticForm.from_coeffs(2, [1, 3, 1])
    with pytest.raises(NotPositiveDefinite):
        QuadraticForm.from_coeffs(2, ["1 - sqrt(2)", 0, 1], Q2)


def test_undeclared_radicand():
    with pytest.raises(FieldError):
        QuadraticForm.from_coeffs(2, ["sqrt(3)", 0, 1], Q2)


def test_brute_force_level_and_box():
    Q = QuadraticForm.from_coeffs(2, [1, 0, 1])
    assert len(box_points(2, 2)) == 25
    assert len(brute_force_level(Q, 25, 5)) == 12


def test_exact_keys_group_equal_values():
    Q = QuadraticForm.from_coeffs(2, ["sqrt(2)", 0, 1], Q2)
    K = np.array([[1, 2], [-1, 2], [2, 0], [0, 3]])
    keys = Q.exact_keys(K)
    assert tuple(keys[0]) == tuple(keys[1])
    assert tuple(keys[2]) != tuple(keys[3])
