import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qdsfluct import corpus

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

QUBIT_BETAS = (1.0, 2.0)
QUBIT_GAMMAS = (1.0, 0.7)


@pytest.fixture(scope="session")
def models():
    return {name: corpus.load(name) for name in corpus.NAMES}


@pytest.fixture(scope="session")
def qubit(models):
    return models["qubit2r"]


@pytest.fixture(scope="session")
def qubit_eq(models):
    return models["qubit2r_equilibrium"]


@pytest.fixture(scope="session")
def qutrit(models):
    return models["qutrit_generic"]


@pytest.fixture(scope="session")
def reducible(models):
    return models["reducible"]


def random_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_state(rng, d):
    A = random_matrix(rng, d)
    rho = A @ A.conj().T + 1e-3 * np.eye(d)
    return rho / np.trace(rho)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
