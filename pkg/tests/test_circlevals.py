import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rz_pairing_lab.circlevals import (
    CircleValue,
    circle_add,
    circle_dist,
    circle_eq,
    circle_neg,
    reduce_mod_z,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
fractions = st.fractions(min_value=-100, max_value=100, max_denominator=997)


def test_reduce_strips_integer_part():
    assert reduce_mod_z(1.75).representative == 0.75


def test_reduce_wraps_negative():
    assert reduce_mod_z(-0.25).representative == 0.75


def test_reduce_integers_to_zero():
    assert reduce_mod_z(3.0).representative == 0.0
    assert reduce_mod_z(7).frac == Fraction(0)


def test_reduce_rejects_non_finite():
    with pytest.raises(ValueError):
        reduce_mod_z(math.inf)
    with pytest.raises(ValueError):
        reduce_mod_z(math.nan)


def test_exact_reduction():
    v = reduce_mod_z(Fraction(-1, 4))
    assert v.is_exact and v.frac == Fraction(3, 4)
    assert v.p == 3 and v.q == 4


def test_add_wraps_past_one():
    assert circle_add(reduce_mod_z(0.5), reduce_mod_z(0.75)).representative == 0.25


def test_add_identity():
    x = reduce_mod_z(0.391)
    assert circle_add(x, reduce_mod_z(0.0)).representative == x.representative


def test_add_exact_inverse_pair():
    total = circle_add(reduce_mod_z(Fraction(1, 3)), reduce_mod_z(Fraction(2, 3)))
    assert total.is_exact and total.frac == 0


def test_mixed_add_loses_exactness():
    total = circle_add(reduce_mod_z(Fraction(1, 3)), reduce_mod_z(0.25))
    assert not total.is_exact


def test_eq_wraps_around():
    assert circle_eq(reduce_mod_z(0.999999), reduce_mod_z(0.000001), 1e-5)


def test_eq_far_apart():
    assert not circle_eq(reduce_mod_z(0.25), reduce_mod_z(0.75), 0.1)


def test_eq_exact_zero_tol():
    assert circle_eq(reduce_mod_z(Fraction(1, 2)), reduce_mod_z(Fraction(1, 2)), 0)
    assert not circle_eq(reduce_mod_z(Fraction(1, 2)), reduce_mod_z(Fraction(1, 3)), 0)


def test_eq_rejects_negative_tol():
    with pytest.raises(ValueError):
        circle_eq(reduce_mod_z(0.1), reduce_mod_z(0.1), -1e-3)


def test_representative_validation():
    with pytest.raises(ValueError):
        CircleValue(1.5)
    with pytest.raises(ValueError):
        CircleValue(0.25, Fraction(1, 2))


def test_render():
    assert reduce_mod_z(Fraction(3, 4)).render() == "3/4 (mod 1)"
    assert reduce_mod_z(0.75).render() == "0.750000000"


@given(finite_floats, finite_floats)
def test_add_commutative(x, y):
    a, b = reduce_mod_z(x), reduce_mod_z(y)
    assert circle_dist(circle_add(a, b), circle_add(b, a)) <= 1e-12


@given(finite_floats, finite_floats, finite_floats)
def test_add_associative(x, y, z):
    a, b, c = reduce_mod_z(x), reduce_mod_z(y), reduce_mod_z(z)
    lhs = circle_add(circle_add(a, b), c)
    rhs = circle_add(a, circle_add(b, c))
    assert circle_dist(lhs, rhs) <= 1e-12


@given(fractions, st.integers(min_value=-50, max_value=50))
def test_reduce_is_periodic_exact(x, n):
    assert reduce_mod_z(x + n).frac == reduce_mod_z(x).frac


@given(finite_floats, finite_floats)
def test_dist_symmetric(x, y):
    a, b = reduce_mod_z(x), reduce_mod_z(y)
    assert circle_dist(a, b) == circle_dist(b, a)


@given(finite_floats, finite_floats, finite_floats)
def test_dist_triangle(x, y, z):
    a, b, c = reduce_mod_z(x), reduce_mod_z(y), reduce_mod_z(z)
    assert circle_dist(a, c) <= circle_dist(a, b) + circle_dist(b, c) + 1e-12


@given(fractions)
def test_neg_is_inverse(x):
    a = reduce_mod_z(x)
    assert circle_add(a, circle_neg(a)).frac == 0
