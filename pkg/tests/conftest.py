from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion_log(request):
    """Record ``(number, passed, detail)`` for the acceptance summary."""
    store = request.config.stash.setdefault(_CRITERIA_KEY, {})

    def record(number: int, passed: bool, detail: str) -> None:
        store[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        passed, detail = store[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
