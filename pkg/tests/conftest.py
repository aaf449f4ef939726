import numpy as np
import pytest

from onsager2d.kernel import onsager_coefficients
from onsager2d.solver import hybrid
from onsager2d.spectral import SpectralField

# v_1 of the positive nontrivial Onsager solution at lambda = 5, from an
# independent scipy.integrate.quad + scipy.optimize.root solve with 12 modes
V1_AT_5 = 0.81138137137


@pytest.fixture(scope="session")
def onsager():
    return onsager_coefficients(64)


@pytest.fixture(scope="session")
def solution_at(onsager):
    cache = {}

    def solve(lam, M=32):
        if (lam, M) not in cache:
            rep = hybrid(SpectralField.mode(1, 0.5, M), lam, onsager, tol=1e-11)
            assert rep.converged, rep.message
            cache[(lam, M)] = rep.solution
        return cache[(lam, M)]

    return solve


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
