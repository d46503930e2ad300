import math

import pytest
from hypothesis import given, settings, strategies as st

from dtplan import parse_domain, validate_domain
from dtplan.baselines import count_plans
from dtplan.domain_io import bundled_text
from dtplan.generate import (
    DVT_SIZES, dvt_like, dvt_like_text, random_domain, random_domain_text, suite_target,
)
from dtplan.model import ActionKind


def test_same_seed_same_text():
    assert random_domain_text(7, plans_target=100) == random_domain_text(7, plans_target=100)
    assert random_domain_text(7, plans_target=100) != random_domain_text(8, plans_target=100)


def test_plan_count_near_target():
    assert 80 <= count_plans(random_domain(7, plans_target=100)) <= 120


@pytest.mark.parametrize("kw", [{"depth": 0}, {"branching": 1}, {"plans_target": 0}])
def test_bad_parameters_rejected(kw):
    with pytest.raises(ValueError):
        random_domain_text(1, **kw)


def test_suite_targets_span_range():
    targets = [suite_target(s) for s in range(1, 201)]
    assert targets[0] == 50 and targets[-1] == 500
    assert targets == sorted(targets)


@settings(max_examples=30)
@given(st.integers(1, 100_000), st.integers(1, 3), st.integers(2, 4), st.integers(1, 400))
def test_generated_domains_are_valid(seed, depth, branching, target):
    d = random_domain(seed, depth, branching, target)
    assert validate_domain(d).ok
    n = count_plans(d)
    assert 0.8 * target <= n <= 1.2 * target or abs(n - target) <= 2
    for a in d.actions.values():
        if a.kind is not ActionKind.PRIMITIVE:
            continue
        cells = {}
        for b in a.branches:
            assert b.prob.is_point()
            cells.setdefault(b.condition, []).append(b.prob.lo)
        for probs in cells.values():
            assert math.isclose(sum(probs), 1.0, abs_tol=1e-9)


@pytest.mark.parametrize("size,count", [("dvt-small", 20), ("dvt-250", 278), ("dvt-1k", 1046),
                                        ("dvt-3k", 3290)])
def test_dvt_family_sizes(size, count):
    d = dvt_like(size)
    assert validate_domain(d).ok
    assert count_plans(d) == count


@pytest.mark.parametrize("size", ["dvt-like", "dvt-small"])
def test_bundled_files_are_generator_output(size):
    assert bundled_text(size) == dvt_like_text(size)


def test_unknown_size():
    with pytest.raises(ValueError):
        dvt_like_text("dvt-huge")
    assert set(DVT_SIZES) >= {"dvt-small", "dvt-like"}


def test_custom_numbers_change_domain():
    d = dvt_like("dvt-small", {"treat_cost": 1234})
    assert d.parameters["TREAT_COST"] == 1234
