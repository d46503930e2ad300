import itertools

import pytest
from hypothesis import given, strategies as st

from dtplan import (
    FALSE, TRUE, AffineExpr, Effect, Interval, WorldState, apply_effect, eval_condition,
    eval_expr,
)
from dtplan.domain_io import parse_condition, parse_expr
from dtplan.errors import UnknownAttributeError


def S(**kw):
    return WorldState(kw)


def test_fuel_minus_five():
    assert eval_expr(parse_expr("fuel - 5"), S(fuel=10)) == Interval(5, 5)


def test_constant_zero_anywhere():
    assert eval_expr(AffineExpr.const(0), S(fuel=(3, 7))) == Interval(0, 0)


def test_delivered_tomatoes_hand_evaluation():
    # 0 + 0.9 * 10 = 9
    e = parse_expr("ton_delivered + 0.9*ton_intruck")
    r = eval_expr(e, S(ton_delivered=0, ton_intruck=10))
    assert r.isclose(Interval(9, 9), 1e-12)


def test_sunny_and_warehouse_true():
    c = parse_condition(["sunny = 1", "warehouse = 1"], "test")
    assert eval_condition(c, S(sunny=1, warehouse=1)) is True


def test_false_condition_is_false():
    assert eval_condition(FALSE, S(x=0)) is False
    assert eval_condition(TRUE, S(x=0)) is True


def test_straddling_threshold_is_unknown():
    c = parse_condition("fuel >= 5", "test")
    assert eval_condition(c, S(fuel=(3, 7))) is None


def test_effect_fuel_assignment():
    eff = Effect.of({"fuel": parse_expr("fuel - 5")})
    assert apply_effect(eff, S(fuel=10))["fuel"] == Interval(5, 5)


def test_effect_leaves_other_attributes():
    eff = Effect.of({"warehouse": AffineExpr.const(0)})
    out = apply_effect(eff, S(warehouse=1, fuel=10, sunny=1))
    assert out == S(warehouse=0, fuel=10, sunny=1)


def test_effects_are_simultaneous():
    eff = Effect.of({"x": AffineExpr.var("y"), "y": AffineExpr.var("x")})
    out = apply_effect(eff, S(x=1, y=2))
    assert out["x"] == Interval(2, 2) and out["y"] == Interval(1, 1)


def test_unknown_attribute_raises():
    with pytest.raises(UnknownAttributeError):
        eval_expr(parse_expr("z + 1"), S(x=0))


# -- properties ------------------------------------------------------------

small = st.integers(-20, 20)


@st.composite
def boxes(draw):
    out = {}
    for name in ("x", "y"):
        a, b = draw(small), draw(small)
        out[name] = (min(a, b), max(a, b))
    return out


exprs = st.sampled_from(["x + y", "2*x - y + 3", "-x", "[1, 2]*x + y", "x - [0, 4]"])
conds = st.sampled_from([["x >= 0"], ["x < 3", "y = 1"], {"any": ["x <= -2", "y > 4"]},
                         ["x = 0"], "y <= 5"])


def corners(box):
    return [dict(zip(box, pt)) for pt in itertools.product(*box.values())]


@given(boxes(), boxes(), exprs)
def test_eval_expr_inclusion_monotone(b1, b2, text):
    e = parse_expr(text)
    inner = {k: (max(b1[k][0], b2[k][0]), min(b1[k][1], b2[k][1])) for k in b1}
    if any(lo > hi for lo, hi in inner.values()):
        return
    outer = {k: (min(b1[k][0], inner[k][0]), max(b1[k][1], inner[k][1])) for k in b1}
    assert eval_expr(e, WorldState(outer)).contains(eval_expr(e, WorldState(inner)))


@given(boxes(), conds)
def test_three_valued_truth_sound_on_corners(box, raw):
    c = parse_condition(raw, "prop")
    t = eval_condition(c, WorldState(box))
    # every integer point of the box agrees with a definite verdict
    for pt in itertools.product(*(range(lo, hi + 1) for lo, hi in box.values())):
        point = dict(zip(box, pt))
        if t is not None:
            assert c.holds(point) is t


@given(boxes())
def test_concrete_in_concrete_out(box):
    point = {k: lo for k, (lo, hi) in box.items()}
    eff = Effect.of({"x": parse_expr("2*x + y"), "y": parse_expr("x - 1")})
    assert apply_effect(eff, WorldState(point)).is_concrete()
