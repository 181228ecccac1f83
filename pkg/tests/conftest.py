import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-resolution property suites (deselect with -m \"not slow\")")

from src.flow import solve
from src.grid import Field, Grid
from src.metrics import H0, H1


@pytest.fixture(scope="module")
def grid64():
    return Grid(64)


@pytest.fixture(scope="module")
def sine64(grid64):
    return Field(grid64, 0.1 * np.sin(grid64.nodes))


@pytest.fixture(scope="module")
def burgers_trajectory(sine64):
    return solve(H0, sine64, T=0.5, dt=1e-2)


@pytest.fixture(scope="module")
def kdv_trajectory(sine64):
    return solve(H0, sine64, a=0.5, T=0.5, dt=1e-2)


@pytest.fixture(scope="module")
def camassa_holm_trajectory(sine64):
    return solve(H1, sine64, T=1.0, dt=1e-2)
