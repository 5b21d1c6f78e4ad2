import numpy as np
import pytest

from qsysid.model import ModelParams
from qsysid.sampling import uniform_grid
from qsysid.simulator import exact_trace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def half_data():
    """Noiseless trace for Omega = 2, alpha = pi/4 (x = 0.5), T = 100, N_t = 256."""
    return exact_trace(ModelParams(2.0, np.pi / 4), uniform_grid(100.0, 256))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
