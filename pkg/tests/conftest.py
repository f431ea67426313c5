import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, m, n=None):
    shape = (m, m) if n is None else (m, n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
