from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from packgame.exact import (
    BiQuadElem,
    IncompatibleFieldError,
    QuadElem,
    format_rational,
    number_from_json,
    number_to_json,
    parse_rational,
    sign,
    simplify,
    sqrt_exact,
    squarefree_decompose,
    to_float,
    xadd,
    xmul,
)

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)
radicands = st.sampled_from([2, 3, 5, 6, 7, 10, 21])


@st.composite
def quads(draw, d=None):
    return QuadElem(draw(fracs), draw(fracs), d if d is not None else draw(radicands))


def test_squarefree_decompose():
    assert squarefree_decompose(72) == (6, 2)
    assert squarefree_decompose(49) == (7, 1)
    assert squarefree_decompose(21) == (1, 21)


def test_sqrt_exact_rational_and_surd():
    assert sqrt_exact(Fraction(9, 4)) == Fraction(3, 2)
    assert sqrt_exact(8) == QuadElem(0, 2, 2)
    assert sqrt_exact(Fraction(1, 7)) == QuadElem(0, Fraction(1, 7), 7)
    with pytest.raises(ValueError):
        sqrt_exact(-1)


def test_rational_quad_normalises():
    assert QuadElem(3, 0, 5) == 3
    assert QuadElem(1, 1, 4) == 3
    assert simplify(QuadElem(2, 0, 7)) == 2


def test_mixed_radicands_raise_but_lift_explicitly():
    with pytest.raises(IncompatibleFieldError):
        QuadElem(0, 1, 2) + QuadElem(0, 1, 3)
    s = xadd(QuadElem(0, 1, 2), QuadElem(0, 1, 3))
    assert isinstance(s, BiQuadElem)
    assert math.isclose(float(s), math.sqrt(2) + math.sqrt(3))
    assert xmul(QuadElem(0, 1, 2), QuadElem(0, 1, 3)) == QuadElem(0, 1, 6)


@given(quads(d=5), quads(d=5), quads(d=5))
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0
    if x:
        assert x * x.inverse() == 1


@given(quads())
def test_sign_matches_float(x):
    f = float(to_float(x, 200))
    assert sign(x) == (f > 0) - (f < 0)


@given(quads(), quads())
def test_order_matches_high_precision(x, y):
    if x.d != y.d and x.d != 1 and y.d != 1:
        return
    fx, fy = to_float(x, 200), to_float(y, 200)
    assert (x < y) == (fx < fy)


@given(quads())
def test_norm_is_product_with_conjugate(x):
    assert x * x.conjugate() == x.norm()


@settings(max_examples=50)
@given(fracs, fracs, fracs, fracs)
def test_biquad_inverse(c0, c1, c2, c3):
    x = BiQuadElem(2, 3, c0, c1, c2, c3)
    if not x:
        return
    assert simplify(x * x.inverse()) == 1


@given(st.one_of(fracs, quads()))
def test_json_round_trip(x):
    x = simplify(x)
    assert number_from_json(number_to_json(x)) == x


def test_rational_strings():
    assert format_rational(Fraction(-14, 9)) == "-14/9"
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational(4) == 4


def test_to_float_precision():
    x = QuadElem(9, 4, 5)
    with mpmath.workprec(400):
        ref = 9 + 4 * mpmath.sqrt(5)
        assert abs(to_float(x, 300) - ref) < mpmath.mpf(10) ** -80
    with pytest.raises(ValueError):
        to_float(x, 20)
