"""Acceptance criteria, one test per criterion.

Every test records a ``CRITERION n PASS|FAIL ...`` line, printed as it runs
and again in the pytest terminal summary.  Run alone with::

    pytest tests/test_acceptance.py -v -s
"""

import math
import time

import numpy as np
import pytest

from dtplan.baselines import (
    bb_decision_tree, count_plans, derives, enumerate_optimal, enumerate_plans,
    evaluate_all_plans,
)
from dtplan.domain_io import load_domain
from dtplan.generate import dvt_like, random_domain, suite_target
from dtplan.planner import Budget, Strategy, delta_functions, drips_plan
from dtplan.abstraction import expand
from dtplan.projection import bound_weighted_sum, compile_domain

from conftest import ACCEPTANCE_LINES
from oracles import lp_vertex_bounds

pytestmark = pytest.mark.slow

SEEDS = range(1, 201)
STRATEGIES = ("first", "priority", "sensitivity")
TOL = 1e-9


def report(n: int, ok: bool, detail: str):
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def suite_domain(seed):
    return random_domain(seed, plans_target=suite_target(seed))


def same_plans(got, want):
    g = sorted((p.steps, p.lo, p.hi) for p in got)
    w = sorted((p.steps, p.lo, p.hi) for p in want)
    if [x[0] for x in g] != [x[0] for x in w]:
        return False
    return all(abs(a[1] - b[1]) <= TOL and abs(a[2] - b[2]) <= TOL for a, b in zip(g, w))


@pytest.fixture(scope="module")
def suite():
    """Criterion-1 runs with the checks needed by criteria 3 and 9 attached."""
    out = {"runs": 0, "mismatch": [], "expansions": 0, "nesting": [], "frontiers": 0,
           "lost": [], "seconds": 0.0}
    for seed in SEEDS:
        t0 = time.perf_counter()
        d = compile_domain(suite_domain(seed))
        oracle = enumerate_optimal(d).plans
        checking = 0.0
        for kind in STRATEGIES:

            def on_expand(parent, kids):
                nonlocal checking
                c0 = time.perf_counter()
                out["expansions"] += 1
                for c in kids:
                    if not parent.eu.eu.contains(c.eu.eu, tol=TOL):
                        out["nesting"].append((seed, kind, parent.steps, c.steps))
                checking += time.perf_counter() - c0

            def on_frontier(frontier):
                nonlocal checking
                c0 = time.perf_counter()
                out["frontiers"] += 1
                for q in oracle:
                    if not any(derives(p.steps, q.steps, d.domain) for p in frontier):
                        out["lost"].append((seed, kind, q.steps))
                checking += time.perf_counter() - c0

            res = drips_plan(d, Strategy(kind), on_expand=on_expand, on_frontier=on_frontier)
            out["runs"] += 1
            if not same_plans(res.plans, oracle):
                out["mismatch"].append((seed, kind))
        out["seconds"] += time.perf_counter() - t0 - checking
    return out


def test_criterion_1_oracle_equivalence(suite):
    ok = not suite["mismatch"] and suite["seconds"] < 300
    report(1, ok, f"oracle equivalence: {suite['runs'] - len(suite['mismatch'])}/{suite['runs']} "
                  f"runs equal to exhaustive evaluation, {suite['seconds']:.1f} s (limit 300 s)")
    assert not suite["mismatch"], suite["mismatch"][:5]
    assert suite["seconds"] < 300


def _sample_abstract_plan(d, rng):
    steps = (d.root,)
    for _ in range(int(rng.integers(0, 6))):
        open_ = [i for i, s in enumerate(steps) if not d.is_primitive(s)]
        if not open_:
            break
        k = int(rng.choice(open_))
        options = expand(steps[k], d)
        seq = options[int(rng.integers(len(options)))]
        steps = steps[:k] + tuple(seq) + steps[k + 1:]
    if all(d.is_primitive(s) for s in steps):
        return None
    return steps


def test_criterion_2_interval_soundness():
    rng = np.random.default_rng(2024)
    sampled, bad, checked = 0, [], 0
    per_domain = 5
    for seed in SEEDS:
        cd = compile_domain(suite_domain(seed))
        d = cd.domain
        tries = 0
        got = set()
        while len(got) < per_domain and tries < 200:
            tries += 1
            p = _sample_abstract_plan(d, rng)
            if p is not None:
                got.add(p)
        for p in sorted(got):
            sampled += 1
            eu = cd.evaluate(list(p)).eu
            for q in evaluate_all_plans(cd, enumerate_plans(d, p)):
                checked += 1
                if not eu.contains(q.eu.eu, tol=TOL):
                    bad.append((seed, p, q.steps))
    ok = not bad and sampled >= 1000
    report(2, ok, f"interval soundness: {sampled} abstract plans, {checked} instantiations, "
                  f"{len(bad)} outside their abstract interval")
    assert sampled >= 1000
    assert not bad, bad[:5]


def test_criterion_3_refinement_monotonicity(suite):
    ok = not suite["nesting"]
    report(3, ok, f"refinement monotonicity: {suite['expansions']} expansions, "
                  f"{len(suite['nesting'])} children outside their parent interval")
    assert ok, suite["nesting"][:5]


def test_criterion_4_bound_weighted_sum_exactness():
    rng = np.random.default_rng(4)
    worst, n, bad = 0.0, 0, 0
    while n < 10_000:
        k = int(rng.integers(1, 7))
        centre = rng.dirichlet(np.ones(k))
        p_lo = np.clip(centre - rng.random(k) * 0.3, 0, 1)
        p_hi = np.clip(centre + rng.random(k) * 0.3, 0, 1)
        if rng.random() < 0.2:  # some point probabilities
            p_lo[0] = p_hi[0] = centre[0]
        a, b = rng.normal(0, 100, k), rng.normal(0, 100, k)
        u_lo, u_hi = np.minimum(a, b), np.maximum(a, b)
        if rng.random() < 0.3:
            u_hi = u_lo.copy()
        r = bound_weighted_sum(u_lo, u_hi, p_lo, p_hi)
        lo, hi = lp_vertex_bounds(u_lo, u_hi, p_lo, p_hi)
        err = max(abs(r.lo - lo), abs(r.hi - hi))
        worst = max(worst, err)
        bad += err > TOL
        n += 1
    report(4, bad == 0, f"bound_weighted_sum: {n} instances vs LP vertices, "
                        f"worst deviation {worst:.2e}")
    assert bad == 0


@pytest.fixture(scope="module")
def dvt():
    return load_domain("dvt-like")


def test_criterion_5_pruning_effectiveness(dvt):
    n = count_plans(dvt)
    res = drips_plan(dvt, Strategy("priority"))
    frac = res.stats.plans_evaluated / n
    ok = frac <= 0.25 and same_plans(res.plans, enumerate_optimal(dvt).plans)
    report(5, ok, f"pruning: fixed-priority evaluated {res.stats.plans_evaluated} of {n} "
                  f"concrete plans ({100 * frac:.1f}%, gate 25%)")
    assert ok


def test_criterion_6_memory_direction(dvt):
    bb = bb_decision_tree(dvt)
    peaks = {k: drips_plan(dvt, Strategy(k)).stats.peak_states for k in STRATEGIES}
    ratio = peaks["priority"] / bb.stats.peak_states
    ok = ratio < 0.5
    others = ", ".join(f"{k} {v}" for k, v in peaks.items())
    report(6, ok, f"memory: fixed-priority peak {peaks['priority']} vs branch-and-bound "
                  f"{bb.stats.peak_states} (ratio {ratio:.3f}, gate 0.5); all strategies: {others}")
    assert ok


def test_criterion_7_scaling_direction():
    sizes = ["dvt-250", "dvt-1k", "dvt-3k", "dvt-like"]
    rows = []
    for s in sizes:
        d = dvt_like(s)
        n = count_plans(d)
        bb = bb_decision_tree(d).stats.plans_evaluated / n
        dr = drips_plan(d, Strategy("priority")).stats.plans_evaluated / n
        rows.append((s, n, bb, dr))
    bb_ok = all(b[2] >= a[2] for a, b in zip(rows, rows[1:]))
    dr_ok = rows[-1][3] < rows[0][3]
    table = "; ".join(f"{s} ({n}): bb {b:.3f}, drips {r:.3f}" for s, n, b, r in rows)
    report(7, bb_ok and dr_ok,
           f"scaling (evaluations per plan): bb non-decreasing {bb_ok}, drips decreases {dr_ok}; "
           + table)
    assert dr_ok, "refinement planner's evaluations per plan did not decrease"
    assert bb_ok, "branch-and-bound evaluations per plan are not non-decreasing with size"


def test_criterion_8_strategy_behavior(dvt):
    points = np.linspace(50_000, 500_000, 10)
    sens, first = [], []
    for v in points:
        d = dvt.with_parameters({"COST_FATALITY": float(v)})
        sens.append(drips_plan(d, Strategy("sensitivity")).stats.plans_evaluated)
        first.append(drips_plan(d, Strategy("first")).stats.plans_evaluated)
    mean = sum(sens) / len(sens)
    spread = max(abs(s - mean) / mean for s in sens)
    below = all(s <= f for s, f in zip(sens, first))
    ok = below and spread < 0.30
    report(8, ok, f"strategy sweep: sensitivity {sens} vs first-action {first}; "
                  f"sensitivity <= first everywhere {below}; "
                  f"max deviation from sweep mean {100 * spread:.1f}% (gate 30%)")
    assert below
    assert spread < 0.30


def test_criterion_9_anytime_containment(suite):
    # the callback frontier is what a run truncated at that expansion count returns;
    # confirm that directly on a handful of domains, then use the full record
    direct_bad = 0
    for seed in range(1, 11):
        d = compile_domain(suite_domain(seed))
        oracle = enumerate_optimal(d).plans
        full = drips_plan(d, Strategy("priority"))
        for k in range(full.stats.expansions + 1):
            cut = drips_plan(d, Strategy("priority"), Budget(max_expansions=k))
            for q in oracle:
                if not any(derives(p.steps, q.steps, d.domain) for p in cut.plans):
                    direct_bad += 1
    ok = not suite["lost"] and direct_bad == 0
    report(9, ok, f"anytime containment: {suite['frontiers']} intermediate frontiers, "
                  f"{len(suite['lost'])} lost an optimal plan; truncated reruns lost {direct_bad}")
    assert ok, suite["lost"][:5]


def test_criterion_10_sensitivity_sanity():
    d = load_domain("test-pair")
    plan = ("Onset", "NIT", "Treat_NIT", "Outcome")
    values = {delta_functions(d, plan, 1, c)[1] for c in range(4)}
    ok = values == {180.0}
    report(10, ok, f"worked example: dUR+ of the abstract test = {sorted(values)} (expected 180)")
    assert ok
