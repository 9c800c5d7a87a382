import numpy as np
import pytest

import oracles

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def bessel_reference():
    """1000 log-spaced points in [1e-3, 200] with extended-precision J0, Y0."""
    xs = np.geomspace(1e-3, 200.0, 1000)
    j0 = np.array([oracles.j0_series(x) for x in xs])
    y0 = np.array([oracles.y0_series(x) for x in xs])
    return xs, j0, y0


@pytest.fixture
def acceptance_report():
    def report(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
