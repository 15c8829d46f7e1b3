import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fracrd", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fracrd")

ACCEPTANCE_LINES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report_criterion():
    """Record one summary line per acceptance criterion."""
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call" and rep.failed:
        number = marker.args[0]
        line = ACCEPTANCE_LINES.get(number, "")
        if "PASS" in line or not line:
            ACCEPTANCE_LINES[number] = f"criterion {number:>2}: FAIL  {rep.longrepr.reprcrash.message.splitlines()[0]}" \
                if hasattr(rep.longrepr, "reprcrash") else f"criterion {number:>2}: FAIL"
