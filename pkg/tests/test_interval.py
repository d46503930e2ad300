import math

import pytest
from hypothesis import given, strategies as st

from dtplan.interval import Interval, add, hull, intersect, mul, scale, sub

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def test_add_endpoints():
    assert add(Interval(1, 2), Interval(3, 4)) == Interval(4, 6)


def test_hull_of_points():
    assert hull(Interval(0.8, 0.8), Interval(0.95, 0.95)) == Interval(0.8, 0.95)


def test_mul_straddling_zero():
    assert mul(Interval(-1, 1), Interval(-1, 1)) == Interval(-1, 1)


def test_sub_and_scale():
    assert sub(Interval(5, 6), Interval(1, 2)) == Interval(3, 5)
    assert scale(Interval(1, 2), -2) == Interval(-4, -2)


def test_intersect_disjoint_is_none():
    assert intersect(Interval(0, 1), Interval(2, 3)) is None
    assert intersect(Interval(0, 2), Interval(1, 3)) == Interval(1, 2)


def test_malformed_interval_rejected():
    with pytest.raises(ValueError):
        Interval(2, 1)
    with pytest.raises(ValueError):
        Interval(math.nan, 1)


def test_outward_rounding_contains_exact_sum():
    # 0.1 + 0.2 is not representable; the result must straddle the real value
    r = Interval(0.1, 0.1) + Interval(0.2, 0.2)
    assert r.lo < r.hi
    assert r.lo <= 0.30000000000000004 and r.hi >= 0.3


@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_operations_contain_pointwise_results(a, b, s, t):
    x = a.lo + s * (a.hi - a.lo)
    y = b.lo + t * (b.hi - b.lo)
    x = min(max(x, a.lo), a.hi)
    y = min(max(y, b.lo), b.hi)
    assert (a + b).contains(x + y, tol=1e-9 * (1 + abs(x + y)))
    assert (a - b).contains(x - y, tol=1e-9 * (1 + abs(x - y)))
    assert (a * b).contains(x * y, tol=1e-9 * (1 + abs(x * y)))


@given(intervals(), intervals(), intervals())
def test_inclusion_isotone(a, b, c):
    wide = a.hull(c)
    assert (wide + b).contains(a + b)
    assert (wide * b).contains(a * b)
    assert (wide - b).contains(a - b)


@given(intervals(), intervals())
def test_hull_and_intersection_laws(a, b):
    h = a.hull(b)
    assert h.contains(a) and h.contains(b)
    i = a.intersect(b)
    if i is not None:
        assert a.contains(i) and b.contains(i)
