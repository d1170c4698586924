from fractions import Fraction

import pytest

from torus_localize import ScalarField, Surd
from torus_localize.errors import ConfigParse, FieldError
from torus_localize.scalars import is_squarefree, squarefree_decompose


def test_squarefree_decompose():
    assert squarefree_decompose(20) == (2, 5)
    assert squarefree_decompose(3) == (1, 3)
    assert squarefree_decompose(72) == (6, 2)
    assert is_squarefree(30) and not is_squarefree(12)


def test_surd_arithmetic_is_exact():
    r2 = Surd.sqrt_of(2)
    assert r2 * r2 == Surd.rational(2)
    assert (1 + r2) * (1 - r2) == Surd.rational(-1)
    assert Surd.sqrt_of(8) == 2 * r2
    assert Surd.sqrt_of(Fraction(1, 4)) == Surd.rational(Fraction(1, 2))


def test_surd_sign_near_cancellation():
    # 99 - 70 sqrt 2 is about 0.00505; 577 - 408 sqrt 2 about 0.0012
    assert (99 - 70 * Surd.sqrt_of(2)).sign() == 1
    assert (408 * Surd.sqrt_of(2) - 577).sign() == -1
    assert Surd.rational(0).sign() == 0


@pytest.mark.parametrize("text", ["sqrt(2)", "-sqrt(2)", "-1 + 3/2*sqrt(2) + sqrt(3)", "5/7"])
def test_str_round_trip(text):
    F = ScalarField("quadirr", (2, 3))
    v = F.parse(text)
    assert F.parse(str(v)) == v


def test_parse_float_and_fields():
    assert ScalarField.from_spec("float").parse("sqrt(2)") == pytest.approx(2 ** 0.5)
    assert ScalarField.from_spec("quadirr(2, 3)").radicands == (2, 3)
    with pytest.raises(FieldError):
        ScalarField.from_spec("quadirr(4)")
    with pytest.raises(FieldError):
        ScalarField("rational").element(0.5)


def test_parse_error_names_token():
    with pytest.raises(ConfigParse) as exc:
        ScalarField("rational").parse("1 + * 2")
    assert "'*'" in str(exc.value)


def test_float_equality_tolerance():
    F = ScalarField("float", (), 1e-9)
    assert F.eq(1.0, 1.0 + 1e-12)
    assert not F.eq(1.0, 1.001)
