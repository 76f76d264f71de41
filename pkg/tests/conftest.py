"""Shared fixtures: session-wide caches for expensive fronts and engine runs."""

from __future__ import annotations

import pytest

from sdnbi.engines import EngineConfig, run
from sdnbi.problems import get_problem, reference_front

_REFERENCES: dict = {}
_RUNS: dict = {}


def cached_reference(name: str):
    """Reference front of a benchmark with its default settings, computed once."""
    if name not in _REFERENCES:
        _REFERENCES[name] = reference_front(get_problem(name))
    return _REFERENCES[name]


def cached_run(name: str, algorithm: str, observer=None, **overrides):
    """Engine result for (problem, algorithm, overrides), computed once.

    An observer forces a fresh run since it must see every iteration.
    """
    key = (name, algorithm, tuple(sorted(overrides.items())))
    if observer is not None or key not in _RUNS:
        spec = get_problem(name)
        result = run(spec, EngineConfig.for_problem(spec, algorithm, **overrides), observer)
        if observer is not None:
            return result
        _RUNS[key] = result
    return _RUNS[key]


@pytest.fixture(scope="session")
def reference():
    return cached_reference


@pytest.fixture(scope="session")
def engine_run():
    return cached_run


ACCEPTANCE_LINES: list[str] = []


def acceptance(number: int, title: str, ok: bool, detail: str) -> bool:
    """Log one acceptance criterion; the lines are printed after the run."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
