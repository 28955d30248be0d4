import math

import numpy as np
import pytest
from scipy.optimize import minimize

import oracles
from conftest import QUBIT_BETAS, QUBIT_GAMMAS
from qdsfluct.fcs import entropy_production, steady_state
from qdsfluct.ratefunc import ScanBoxError, cgf_scan, legendre, rate_function


@pytest.fixture(scope="module")
def qubit_scan():
    from qdsfluct import corpus

    return cgf_scan(corpus.load("qubit2r"), [(-1, 2), (-1, 2)], resolution=7)


def oracle_rate(s):
    """Legendre transform of the closed-form CGF by a generic optimizer."""
    res = minimize(lambda a: a @ s + oracles.cgf(a, QUBIT_BETAS, QUBIT_GAMMAS), np.array([0.5, 0.5]),
                   method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return -res.fun


def test_scan_shape_and_origin(qubit_scan):
    assert qubit_scan.grid.shape == (49, 2)
    i0 = int(np.argmin(np.linalg.norm(qubit_scan.grid, axis=1)))
    assert abs(qubit_scan.values[i0]) < 1e-12
    assert np.all(qubit_scan.gaps > 0)
    assert qubit_scan.hessian0.shape == (2, 2)


def test_scan_box_must_match_model(qubit):
    with pytest.raises(ValueError):
        cgf_scan(qubit, [(-1, 1)], 3, derivatives=False)


def test_rate_zero_at_mean(qubit_scan):
    sb = qubit_scan.mean_rates
    assert abs(rate_function(qubit_scan, sb)) < 1e-10


def test_reflection_identity(qubit_scan):
    sb = qubit_scan.mean_rates
    sigma = entropy_production(qubit_scan.model, steady_state(qubit_scan.model))
    Im = rate_function(qubit_scan, -sb)
    assert abs(Im - sb.sum() - rate_function(qubit_scan, sb)) < 1e-10
    assert abs(Im - sigma) < 1e-10


@pytest.mark.parametrize("c", [0.0, 0.1, -0.2, 0.5])
def test_matches_oracle_on_hyperplane(qubit_scan, c):
    s = c * np.array([1.0, -2.0])  # beta^{-1} . s = 0 for beta = (1, 2)
    assert abs(rate_function(qubit_scan, s) - oracle_rate(s)) < 1e-8


@pytest.mark.parametrize("s", [[0.1, 0.0], [1.0, 1.0], [-0.3, 0.2]])
def test_infinite_off_hyperplane(qubit_scan, s):
    r = legendre(qubit_scan, s)
    assert r.value == math.inf
    assert "reason" in r.diagnostics


def test_symmetric_relation_on_grid(qubit_scan):
    for c in (0.05, 0.2):
        s = c * np.array([1.0, -2.0])
        assert abs(rate_function(qubit_scan, -s) - s.sum() - rate_function(qubit_scan, s)) < 1e-9


def test_small_box_is_reported(qubit):
    scan = cgf_scan(qubit, [(-0.1, 0.1), (-0.1, 0.1)], 3, derivatives=False)
    with pytest.raises(ScanBoxError):
        legendre(scan, 3 * np.array([1.0, -2.0]))
