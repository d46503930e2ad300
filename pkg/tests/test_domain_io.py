import pytest
from hypothesis import given, settings, strategies as st

from dtplan import Interval, parse_domain, serialize_domain, validate_domain
from dtplan.domain_io import bundled_names, load_domain
from dtplan.errors import DomainError, DomainReferenceError, DomainSyntaxError
from dtplan.generate import random_domain_text

from conftest import domain_from


def test_tomato_first_branch(tomato):
    a = tomato.action("Deliver-tomato")
    assert len(a.branches) == 6
    assert a.branches[0].prob == Interval(0.8, 0.8)


def test_empty_document_is_syntax_error():
    with pytest.raises(DomainSyntaxError):
        parse_domain("")


def test_yaml_error_carries_position():
    with pytest.raises(DomainSyntaxError) as info:
        parse_domain("actions: [\n  bad")
    assert info.value.line == 2


def test_undeclared_action_named():
    text = """
    attributes: {x: {kind: boolean}}
    actions:
      P: {branches: [{prob: 1}]}
    network:
      root: A
      decompose: {A: [P, NIT]}
    utility: {ug: [{when: true, value: x}]}
    """
    with pytest.raises(DomainReferenceError) as info:
        domain_from(text)
    assert info.value.name == "NIT"
    assert "NIT" in str(info.value)


def test_missing_file_is_domain_error(tmp_path):
    with pytest.raises(DomainError):
        load_domain(tmp_path / "nope.yaml")


@pytest.mark.parametrize("name", ["tomato", "test-pair", "dvt-small", "dvt-like"])
def test_bundled_domains_validate(name):
    assert name in bundled_names()
    report = validate_domain(load_domain(name))
    assert report.ok, str(report)


def test_probability_sum_reported():
    text = """
    attributes: {x: {kind: boolean}}
    actions:
      A:
        branches:
          - {when: [x = 0], prob: 0.8, effects: {x: 1}}
          - {when: [x = 0], prob: 0.1}
          - {when: [x = 1], prob: 1}
    network: {root: A}
    utility: {ug: [{when: true, value: x}]}
    """
    report = validate_domain(domain_from(text))
    assert [i.code for i in report.issues] == ["probability"]
    assert "sum to 0.9" in str(report)


def test_cycle_reported():
    text = """
    attributes: {x: {kind: boolean}}
    actions:
      P: {branches: [{prob: 1}]}
    network:
      root: A
      decompose: {A: [P, A]}
    utility: {ug: [{when: true, value: x}]}
    """
    report = validate_domain(domain_from(text))
    assert any(i.code == "cycle" for i in report.issues)


def test_tomato_round_trip(tomato):
    assert parse_domain(serialize_domain(tomato)) == tomato


def test_interval_coefficient_survives_serialization():
    text = """
    attributes: {cost: {range: [0, 1000]}}
    actions:
      T: {branches: [{prob: 1, effects: {cost: "cost + [120, 300]"}}]}
    network: {root: T}
    utility: {ur: [{when: true, value: -cost}]}
    """
    d = domain_from(text)
    out = serialize_domain(d)
    assert "[120, 300]" in out
    eff = parse_domain(out).action("T").branches[0].effect.as_dict()["cost"]
    assert eff.constant == Interval(120, 300)


def test_false_padding_branch_serialized():
    text = """
    attributes: {x: {kind: boolean}}
    actions:
      P: {branches: [{prob: 1}, {when: false, prob: 0, effects: {x: 1}}]}
    network: {root: P}
    utility: {ug: [{when: true, value: x}]}
    """
    d = domain_from(text)
    out = serialize_domain(d)
    assert "when: false" in out
    assert parse_domain(out).action("P").branches[1].condition.is_false()


@settings(max_examples=25)
@given(st.integers(1, 10_000), st.integers(1, 3), st.integers(2, 4), st.integers(5, 200))
def test_generated_domains_round_trip(seed, depth, branching, target):
    d = parse_domain(random_domain_text(seed, depth, branching, target))
    again = parse_domain(serialize_domain(d))
    assert again == d
    assert serialize_domain(again) == serialize_domain(d)


@pytest.mark.parametrize("name", ["dvt-small", "test-pair"])
def test_bundled_round_trip(name):
    d = load_domain(name)
    assert parse_domain(serialize_domain(d)) == d
