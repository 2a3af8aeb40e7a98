import pytest

from fuchsian.solver import SolverConfig, solve_rho


@pytest.fixture(scope="session")
def anchor_result():
    """Solved symmetric sphere at working grade (fast, shared across tests)."""
    return solve_rho(2, SolverConfig(precision_bits=320, N=100))


@pytest.fixture(scope="session")
def anchor_result_full():
    """Solved symmetric sphere at the default 512-bit / N=150 configuration."""
    return solve_rho(2, SolverConfig())
