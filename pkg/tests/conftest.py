import numpy as np
import pytest

from revlab.grid import Grid1D, RadialGrid

# acceptance lines collected by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running scenario reproduction")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_grid():
    return Grid1D.symmetric(20.0, 1024)


@pytest.fixture
def radial_grid():
    return RadialGrid(12.0, 2048)
