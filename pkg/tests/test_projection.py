import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtplan import (
    Interval, UtilityModel, WorldState, bound_weighted_sum, chronicle_utility, evaluate_plan,
    project,
)
from dtplan.baselines import enumerate_plans
from dtplan.domain_io import parse_condition, parse_expr
from dtplan.errors import InfeasibleBoxError
from dtplan.generate import random_domain
from dtplan.model import TRUE, AffineExpr

from conftest import domain_from
from oracles import decision_tree_eu, lp_vertex_bounds


def test_tomato_first_chronicle(tomato):
    cs = project(["Deliver-tomato"], None, tomato)
    entries = cs.entries()
    state, prob, _ = entries[0]
    assert prob == Interval(0.8, 0.8)
    assert state["time"] == Interval(70, 70)
    assert state["fuel"] == Interval(5, 5)
    assert state["ton_delivered"].isclose(Interval(9, 9), 1e-12)


def test_empty_plan_is_identity(tomato):
    cs = project([], None, tomato)
    assert len(cs) == 1
    state, prob, _ = cs.entries()[0]
    assert prob == Interval(1, 1)
    assert state == WorldState(tomato.initial)


TWO_STEP = """
attributes: {x: {range: [0, 10]}, y: {range: [0, 10]}}
actions:
  A: {branches: [{prob: 0.3, effects: {x: 1}}, {prob: 0.7, effects: {x: 2}}]}
  B: {branches: [{prob: 0.6, effects: {y: 1}}, {prob: 0.4, effects: {y: 2}}]}
network:
  root: R
  decompose: {R: [A, B]}
utility: {ug: [{when: true, value: x + y}]}
"""


def test_two_step_pairwise_products():
    d = domain_from(TWO_STEP)
    cs = project(["A", "B"], None, d, merge=False)
    got = sorted((s["x"].lo, s["y"].lo, p.lo) for s, p, _ in cs.entries())
    want = sorted((x, y, px * py) for x, px in ((1, 0.3), (2, 0.7)) for y, py in ((1, 0.6), (2, 0.4)))
    assert len(got) == 4
    for g, w in zip(got, want):
        assert g[:2] == w[:2] and g[2] == pytest.approx(w[2], abs=1e-15)
    assert sum(g[2] for g in got) == pytest.approx(1.0, abs=1e-12)


def _dvt_utility():
    ur = ((parse_condition(["dead = 1"], "u"), parse_expr("-(cost + COST_FATALITY)")),
          (parse_condition(["dead = 0"], "u"), parse_expr("-cost")))
    return UtilityModel(((TRUE, AffineExpr()),), ur, 1.0)


def test_fatality_utility():
    s = WorldState({"dead": 1, "cost": 100})
    u = chronicle_utility(s, _dvt_utility(), {"COST_FATALITY": 50000})
    assert u == Interval(-50100, -50100)


def test_cost_range_utility():
    s = WorldState({"dead": 0, "cost": (120, 300)})
    u = chronicle_utility(s, _dvt_utility(), {"COST_FATALITY": 50000})
    assert u == Interval(-300, -120)


def test_zero_utility():
    assert chronicle_utility(WorldState({"x": 0}), UtilityModel()) == Interval(0, 0)


def test_bwsum_example():
    r = bound_weighted_sum([10, 0], [10, 0], [0.2, 0.4], [0.6, 0.8])
    assert r.isclose(Interval(2, 6), 1e-12)
    assert lp_vertex_bounds([10, 0], [10, 0], [0.2, 0.4], [0.6, 0.8]) == pytest.approx((2, 6))


def test_bwsum_single_item():
    assert bound_weighted_sum([-300], [-120], [1], [1]).isclose(Interval(-300, -120), 1e-9)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=6))
def test_bwsum_constant_utility(raw):
    lo = np.array([min(a, b) for a, b in raw])
    hi = np.array([max(a, b) for a, b in raw])
    if lo.sum() > 1 or hi.sum() < 1:
        return
    r = bound_weighted_sum(np.full(len(lo), 5.0), np.full(len(lo), 5.0), lo, hi)
    assert r.isclose(Interval(5, 5), 1e-9)


def test_bwsum_infeasible_box():
    with pytest.raises(InfeasibleBoxError):
        bound_weighted_sum([1, 2], [1, 2], [0.6, 0.6], [0.7, 0.7])


@st.composite
def bwsum_instances(draw):
    n = draw(st.integers(1, 6))
    u = [sorted(draw(st.tuples(st.floats(-100, 100), st.floats(-100, 100)))) for _ in range(n)]
    p = [sorted(draw(st.tuples(st.floats(0, 1), st.floats(0, 1)))) for _ in range(n)]
    return [a for a, _ in u], [b for _, b in u], [a for a, _ in p], [b for _, b in p]


@given(bwsum_instances())
def test_bwsum_matches_lp_vertices(inst):
    u_lo, u_hi, p_lo, p_hi = inst
    if sum(p_lo) > 1 - 1e-9 or sum(p_hi) < 1 + 1e-9:
        return
    r = bound_weighted_sum(u_lo, u_hi, p_lo, p_hi)
    lo, hi = lp_vertex_bounds(u_lo, u_hi, p_lo, p_hi)
    assert r.lo == pytest.approx(lo, abs=1e-9)
    assert r.hi == pytest.approx(hi, abs=1e-9)


def test_concrete_plan_matches_decision_tree(test_pair):
    for plan in enumerate_plans(test_pair):
        eu = evaluate_plan(plan, test_pair).eu
        want = decision_tree_eu(test_pair, plan)
        assert eu.width < 1e-9
        assert eu.lo == pytest.approx(want, abs=1e-9)


def test_abstract_test_contains_instantiations(test_pair):
    plan = ("Onset", "NIT", "Treat_NIT", "Outcome")
    eu = evaluate_plan(plan, test_pair).eu
    for inst in ("IPG", "RUS"):
        c = evaluate_plan(("Onset", inst, "Treat_NIT", "Outcome"), test_pair).eu
        assert eu.contains(c, tol=1e-9)


def test_empty_plan_zero_eu():
    d = domain_from("""
    attributes: {x: {kind: boolean}}
    actions: {P: {branches: [{prob: 1}]}}
    network: {root: P}
    utility: {ug: [{when: true, value: 0}], ur: [{when: true, value: 0}]}
    """)
    assert evaluate_plan((), d).eu == Interval(0, 0)


@settings(max_examples=20)
@given(st.integers(1, 5000))
def test_random_concrete_plans_match_decision_tree(seed):
    d = random_domain(seed, depth=2, branching=3, plans_target=20)
    plans = enumerate_plans(d)
    rng = np.random.default_rng(seed)
    for idx in rng.choice(len(plans), size=min(4, len(plans)), replace=False):
        plan = plans[idx]
        cs = project(plan, None, d)
        assert sum(p.lo for p in (cs.prob(i) for i in range(len(cs)))) == pytest.approx(1, abs=1e-9)
        eu = evaluate_plan(plan, d).eu
        assert eu.lo == pytest.approx(decision_tree_eu(d, plan), abs=1e-9)
        assert eu.width <= 1e-9
