import numpy as np
import pytest

# filled by test_acceptance.py: (criterion number, passed, detail)
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record():
    def _record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, passed, detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {detail}")
