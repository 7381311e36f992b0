import functools

import numpy as np
import pytest

from oqent import dqd
from oqent.optimize import optimize_basis


def random_density(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble density matrix; ``rank=1`` gives a pure state."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ket(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def rwa_params() -> dqd.DqdParams:
    return dqd.calibrate(dqd.DqdParams(), rwa=True)


@pytest.fixture(scope="session")
def lab_params() -> dqd.DqdParams:
    return dqd.calibrate(dqd.DqdParams(), rwa=False)


@pytest.fixture(scope="session")
def noisy_optimum(rwa_params):
    """Optimized basis of the RWA output state at the Bell-point rotation time, cached per delta_j."""

    @functools.lru_cache(maxsize=None)
    def get(delta_j: float):
        rho, gate_f, state_f = dqd.run_circuit(rwa_params, rwa_params.rx_time, dqd.NoiseSetting(delta_j), rwa=True)
        return rho, gate_f, state_f, optimize_basis(rho)

    return get


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
