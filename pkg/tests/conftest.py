import os
import textwrap

import pytest
from hypothesis import HealthCheck, settings

from dtplan.domain_io import load_domain, parse_domain

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def domain_from(text: str):
    return parse_domain(textwrap.dedent(text))


@pytest.fixture(scope="session")
def tomato():
    return load_domain("tomato")


@pytest.fixture(scope="session")
def test_pair():
    return load_domain("test-pair")


@pytest.fixture(scope="session")
def dvt_small():
    return load_domain("dvt-small")


@pytest.fixture(scope="session")
def dvt_like():
    return load_domain("dvt-like")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
