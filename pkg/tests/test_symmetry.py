import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdsfluct.davies import ReservoirSpec, SystemSpec, assemble
from qdsfluct.symmetry import (
    SymmetryReport,
    box_grid,
    chebyshev_smoothness,
    convexity_residual,
    deformed_cp_check,
    energetic_es_residual,
    energetic_translation_residual,
    es_symmetry_residual,
    spectrum_distance,
    translation_similarity,
    translation_symmetry_residual,
)
from qdsfluct.fcs import deform


@pytest.fixture(scope="module")
def non_tri():
    """Equally spaced qutrit with a complex-phase coupling: not time-reversal invariant."""
    Q = np.array([[0, 1, 0], [1, 0, 1j], [0, -1j, 0]])
    Q2 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    m = assemble(SystemSpec(np.diag([0.0, 1.0, 2.0])),
                 [ReservoirSpec(1.0, (Q,), h=1.0), ReservoirSpec(2.0, (Q2,), h=0.5)])
    assert not m.flags["tri"] and m.flags["er"]
    return m


def test_box_grid():
    g = box_grid([(-1, 1), (0, 2)], 3)
    assert g.shape == (9, 2)
    assert np.allclose(g[0], [-1, 0]) and np.allclose(g[-1], [1, 2])


def test_report_status():
    assert SymmetryReport("x", 1e-9, 1e-8).row()["status"] == "pass"
    assert SymmetryReport("x", 1e-7, 1e-8).passed is False
    assert SymmetryReport("x", 1e-7, 1e-8, asserted=False).row()["status"] == "report-only"


def test_es_fixed_point(qubit):
    assert es_symmetry_residual(qubit, [[0.5, 0.5]]).residual == 0.0


@pytest.mark.parametrize("name", ["qubit2r", "qutrit_generic"])
def test_es_symmetry_coarse_grid(models, name):
    rep = es_symmetry_residual(models[name], box_grid([(-1, 2), (-1, 2)], 5))
    assert rep.passed, rep.residual


def test_es_report_only_without_tri(non_tri):
    rep = es_symmetry_residual(non_tri, box_grid([(-0.5, 1.5), (-0.5, 1.5)], 3))
    assert rep.passed is None and rep.row()["status"] == "report-only"


@pytest.mark.parametrize("name", ["qubit2r", "qutrit_generic"])
def test_translation_symmetry(models, name):
    rep = translation_symmetry_residual(models[name], box_grid([(-1, 2), (-1, 2)], 3))
    assert rep.passed, rep.details
    assert rep.details["similarity"] < 1e-12
    assert rep.details["spectrum"] < 1e-8


def test_translation_lambda_zero(qutrit):
    rep = translation_symmetry_residual(qutrit, [[0.3, -0.2]], lams=(0.0,))
    assert rep.residual < 1e-14


def test_translation_similarity_direct(qutrit):
    a = np.array([0.2, 0.6])
    lam = 0.7
    R = translation_similarity(qutrit, lam)
    Rinv = translation_similarity(qutrit, -lam)
    assert np.allclose(R @ Rinv, np.eye(R.shape[0]))
    lhs = deform(qutrit, a + lam / qutrit.betas).matrix
    assert np.allclose(R @ deform(qutrit, a).matrix @ Rinv, lhs, atol=1e-12)


def test_spectrum_distance():
    A = np.diag([1.0, 2.0, 3.0])
    P = np.eye(3)[[2, 0, 1]]
    assert spectrum_distance(A, P @ A @ P.T) < 1e-14
    assert abs(spectrum_distance(A, np.diag([1.0, 2.0, 3.5])) - 0.5) < 1e-14


@pytest.mark.parametrize("name", ["qubit2r", "qutrit_generic"])
def test_energetic_symmetries(models, name):
    g = box_grid([(-1, 1), (-1, 1)], 3)
    assert energetic_translation_residual(models[name], g).passed
    assert energetic_es_residual(models[name], g).passed


@given(st.tuples(st.floats(-1, 2), st.floats(-1, 2)), st.tuples(st.floats(-1, 2), st.floats(-1, 2)))
def test_convex_on_segments(a, b):
    from qdsfluct import corpus

    m = corpus.load("qutrit_generic")
    assert convexity_residual(m, a, b, n=11) <= 1e-10


def test_chebyshev_smoothness(qutrit):
    assert chebyshev_smoothness(qutrit, [0, 0], [1, 0.5]) < 1e-8
    assert chebyshev_smoothness(qutrit, [-0.5, 0.2], [0.3, 1.0]) < 1e-8


@given(st.tuples(st.floats(-1, 2), st.floats(-1, 2)))
def test_deformed_semigroup_cp_property(a):
    from qdsfluct import corpus

    assert deformed_cp_check(corpus.load("qutrit_generic"), a).passed
