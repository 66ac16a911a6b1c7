import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng(request):
    # one fixed stream per test, keyed by the test name
    key = sum(ord(c) * (i + 1) for i, c in enumerate(request.node.name))
    return np.random.default_rng([20091008, key])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
