from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from psrk.algebra import (
    C2,
    C2_FLOAT,
    C3,
    C3_FLOAT,
    ONE,
    ZERO,
    Qc2Element,
    Z1,
    Z2,
    Z3,
    cubic_residual,
    format_rational,
    parse_rational,
    qc2_embed,
    qc2_mul,
)

mpmath.mp.dps = 50
C2_MP = mpmath.mpf(1) / 2 - mpmath.sin(2 * mpmath.pi / 9) / mpmath.sqrt(3)
C3_MP = mpmath.mpf(1) / 2 - mpmath.sin(mpmath.pi / 9) / mpmath.sqrt(3)


def embed_mp(x: Qc2Element):
    return sum(mpmath.mpf(a.numerator) / a.denominator * v for a, v in zip(x.coords, (1, C2_MP, C3_MP)))


small = st.fractions(min_value=-5, max_value=5, max_denominator=20)
elements = st.builds(Qc2Element, small, small, small)


def test_reduction_rules():
    assert (C2 * C2).coords == (Fraction(-1, 12), Fraction(7, 6), Fraction(-1, 6))
    assert (C2 * C3).coords == (Fraction(-1, 12), Fraction(1, 6), Fraction(1, 3))
    assert (C3 * C3).coords == (Fraction(-1, 3), Fraction(1, 6), Fraction(4, 3))


def test_reduction_rules_against_high_precision():
    for x, y in [(C2, C2), (C2, C3), (C3, C3)]:
        assert abs(embed_mp(qc2_mul(x, y)) - embed_mp(x) * embed_mp(y)) < mpmath.mpf(10) ** -45


def test_rules_mutually_consistent():
    assert (C2 * C3) * C3 == C2 * (C3 * C3)
    assert (C2 * C2) * C3 == C2 * (C2 * C3)


def test_c2_and_c3_are_roots_of_the_cubic():
    for z in (C2, C3):
        assert z * (z - Fraction(1, 2)) * (z - 1) == Fraction(1, 24)


def test_third_root_in_field():
    # Roots sum to 3/2, so z3 = 3/2 - c2 - c3 lies in the field too.
    z3 = Fraction(3, 2) - C2 - C3
    assert z3 * (z3 - Fraction(1, 2)) * (z3 - 1) == Fraction(1, 24)
    assert float(z3) == pytest.approx(Z3, abs=1e-15)


def test_cubic_residual_examples():
    assert abs(cubic_residual(Z1)) < 1e-15
    assert abs(cubic_residual(Z3)) < 1e-14
    assert cubic_residual(0.0) == -1 / 24
    assert Z1 == pytest.approx(0.12888, abs=1e-5)
    assert Z3 == pytest.approx(1.06857, abs=1e-5)


def test_embedding_examples():
    assert qc2_embed(C2) == C2_FLOAT == Z1
    assert abs(qc2_embed(C3) - Z2) < 1e-15
    assert qc2_embed(C3) == pytest.approx(0.30253, abs=1e-5)
    assert abs(float(3 - 4 * C2 - 2 * C3) - (1 / (2 * C2_FLOAT) - 2)) < 1e-14
    assert C3_FLOAT == qc2_embed(C3)


def test_closed_forms_exact():
    assert 1 / (2 * C2) - 2 == 3 - 4 * C2 - 2 * C3
    assert 6 * (1 - 2 * C2) ** 2 * C3 == 1


def test_identity_and_zero():
    x = Qc2Element(Fraction(2, 7), Fraction(-3, 5), Fraction(1, 9))
    assert ONE * x == x and x * 1 == x
    assert x + ZERO == x and x - x == ZERO
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_mixed_comparisons():
    assert Qc2Element(Fraction(3)) == 3
    assert Qc2Element(Fraction(1, 2)) == Fraction(1, 2)
    assert hash(Qc2Element(Fraction(1, 2))) == hash(Fraction(1, 2))
    assert C2 != Fraction(0)
    with pytest.raises(TypeError):
        Qc2Element.coerce(0.5)


@given(elements, elements, elements)
def test_ring_axioms(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


@given(elements)
def test_inverse(x):
    if x == ZERO:
        return
    assert x * x.inverse() == ONE
    assert (1 / x) == x.inverse()


@given(elements, elements)
def test_embedding_is_a_ring_homomorphism(x, y):
    assert abs(qc2_embed(x * y) - qc2_embed(x) * qc2_embed(y)) < 1e-13
    assert abs(embed_mp(x * y) - embed_mp(x) * embed_mp(y)) < mpmath.mpf(10) ** -40


@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("-7", Fraction(-7)), (" 10/-4 ", Fraction(-5, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


def test_format_rational():
    assert format_rational(Fraction(6, -4)) == "-3/2"
    assert format_rational(Fraction(5)) == "5"
    with pytest.raises(ValueError):
        parse_rational("1.5")
