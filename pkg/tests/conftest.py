"""Shared fixtures for pynmqsd tests.

For standalone helper functions (configs, study documents),
see helpers.py.
"""

import pytest

from pynmqsd.calculations.models import build_ansatz
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import SystemModel
from pynmqsd.domain.time_grid import TimeGrid

# ---------------------------------------------------------------------------
# Session-scoped fixtures (immutable, shared across all tests in a session)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def ou_kernel():
    """OU kernel with kappa = 1, gamma = 2 (alpha(0) = 1)."""
    return CorrelationKernel.ornstein_uhlenbeck(1.0, 2.0)


@pytest.fixture(scope="session")
def dirac_kernel():
    return CorrelationKernel.dirac(1.0)


@pytest.fixture(scope="session")
def fine_grid():
    """[0, 1] at dt = 1e-3."""
    return TimeGrid(0.0, 1e-3, 1000)


@pytest.fixture(scope="session")
def jc_ou_model(ou_kernel):
    return SystemModel.jaynes_cummings(1.0, ou_kernel)


@pytest.fixture(scope="session")
def dephasing_ou_model(ou_kernel):
    return SystemModel.dephasing(1.0, 0.5, 1.0, ou_kernel)


@pytest.fixture(scope="session")
def jc_ou_table(jc_ou_model, fine_grid):
    return build_ansatz(jc_ou_model, fine_grid)


@pytest.fixture(scope="session")
def dephasing_ou_table(dephasing_ou_model, fine_grid):
    return build_ansatz(dephasing_ou_model, fine_grid)
