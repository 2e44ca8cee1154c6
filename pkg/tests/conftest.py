from __future__ import annotations

import pytest

from screenwise import casegen, vocab

import helpers

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture(scope="session")
def default_rs():
    return helpers.default_ruleset()


@pytest.fixture(scope="session")
def registry():
    return vocab.REGISTRY


@pytest.fixture()
def cases50():
    return casegen.generate_cases(casegen.GeneratorConfig(seed=1, count=50))


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion, even with -q.
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    _ACCEPTANCE[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{name}: {'PASS' if outcome == 'PASSED' else outcome}")
