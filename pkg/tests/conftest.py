"""Shared, session-cached layouts (generation of the full-size stealthy
pattern takes a few seconds, so it is done once)."""

import time
from collections import defaultdict

import pytest

from hudarray.config import RunConfig
from hudarray.pattern import StealthyTargetSpec, generate_stealthy
from hudarray.recipes import hud_pattern, periodic_pattern, random_pattern


@pytest.fixture(scope="session")
def config():
    return RunConfig()


@pytest.fixture(scope="session")
def hud(config):
    """N=200, chi=0.5, 10 mm separation, default box, seed 0."""
    return hud_pattern(config)


@pytest.fixture(scope="session")
def periodic(config):
    return periodic_pattern(config)


@pytest.fixture(scope="session")
def poisson(config):
    return random_pattern(config)


@pytest.fixture(scope="session")
def hud_200mm():
    """The layout requested for the generation benchmark: 200 x 200 mm box.

    Returns ``(pattern, report, wall_seconds)``.
    """
    spec = StealthyTargetSpec(200, 0.5, 0.2, 0.010, seed=0)
    start = time.perf_counter()
    pattern, report = generate_stealthy(spec)
    return pattern, report, time.perf_counter() - start


# ---------------------------------------------------------------- acceptance report

_RESULTS = defaultdict(list)


class _Recorder:
    def __call__(self, criterion: int, ok: bool, detail: str) -> bool:
        _RESULTS[criterion].append((bool(ok), detail))
        print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
        return bool(ok)


@pytest.fixture(scope="session")
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_RESULTS):
        parts = _RESULTS[criterion]
        ok = all(p[0] for p in parts)
        terminalreporter.write_line(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}")
        for part_ok, detail in parts:
            terminalreporter.write_line(f"    {'ok  ' if part_ok else 'FAIL'} {detail}")
