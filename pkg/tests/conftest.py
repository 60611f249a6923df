import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from atomopo.params import SystemParams

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def bad_cavity():
    return SystemParams(g=1.0, kappa=10.0, gamma=1.0, F=1e-3)


@pytest.fixture
def good_cavity():
    return SystemParams(g=10.0, kappa=0.1, gamma=1.0, F=1e-5)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300))


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    """Record a pass/fail line for the acceptance summary, then assert it."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number: int, title: str, passed: bool, detail: str):
        store[number] = (title, bool(passed), detail)
        assert passed, f"criterion {number} ({title}): {detail}"
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        title, passed, detail = store[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}: {detail}")
