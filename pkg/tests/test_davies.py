import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdsfluct import liouville as lv
from qdsfluct.davies import (
    ReservoirSpec,
    SystemSpec,
    assemble,
    build_sub,
    gibbs_state,
    jump_operators,
    kms_complete,
    spohn_condition,
)
from qdsfluct.errors import ValidationError
from qdsfluct.fcs import entropy_production, steady_state
from qdsfluct.lindblad import dissipation

from conftest import random_matrix

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
QUBIT = SystemSpec(np.diag([0.0, 1.0]))
seeds = st.integers(0, 2**32 - 1)


def random_hermitian(rng, d):
    A = random_matrix(rng, d)
    return 0.5 * (A + A.conj().T)


# --- gibbs states ----------------------------------------------------------------


def test_gibbs_state_examples():
    assert np.allclose(gibbs_state(np.zeros((3, 3)), 2.0), np.eye(3) / 3)
    e = np.exp(-1.0)
    assert np.allclose(gibbs_state(np.diag([0.0, 1.0]), 1.0), np.diag([1, e]) / (1 + e))
    rho = gibbs_state(np.diag([0.0, 1.0, 3.0]), 50.0)
    assert rho[1, 1].real < np.exp(-50) * 1.0000001 and rho[2, 2].real < 1e-20
    assert abs(rho[1, 1].real - np.exp(-50) / (1 + np.exp(-50) + np.exp(-150))) < 1e-20


@pytest.mark.parametrize("beta", [0.0, -1.0])
def test_gibbs_state_rejects_nonpositive_beta(beta):
    with pytest.raises(ValidationError):
        gibbs_state(np.eye(2), beta)


@given(seeds, st.floats(0.05, 5.0))
def test_gibbs_state_is_faithful_state(seed, beta):
    H = random_hermitian(np.random.default_rng(seed), 3)
    rho = gibbs_state(H, beta)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho)[0] > 0
    assert np.allclose(H @ rho, rho @ H, atol=1e-10)


# --- jump operators --------------------------------------------------------------


def test_jump_operators_sigma_x():
    V = jump_operators(SX, QUBIT)
    lower = np.array([[0, 1], [0, 0]])
    assert np.allclose(V[1.0], lower)
    assert np.allclose(V[-1.0], lower.T)
    assert np.allclose(V[0.0], 0)


def test_jump_operators_commuting_coupling():
    V = jump_operators(SZ, QUBIT)
    assert np.allclose(V[0.0], SZ)
    assert all(np.allclose(v, 0) for w, v in V.items() if w != 0)


@given(seeds)
def test_jump_operator_relations(seed):
    rng = np.random.default_rng(seed)
    sys = SystemSpec(np.diag([0.0, 0.7, 1.9, 4.0]))
    Q = random_hermitian(rng, 4)
    V = jump_operators(Q, sys)
    assert np.allclose(sum(V.values()), Q, atol=1e-12)
    for w, v in V.items():
        assert np.allclose(V[-w if w else 0.0], v.conj().T, atol=1e-12)
        # V(w) lowers the energy by w
        assert np.allclose(sys.H_S @ v - v @ sys.H_S, -w * v, atol=1e-12)


def test_degenerate_levels_are_merged():
    sys = SystemSpec(np.diag([0.0, 1.0, 1.0 + 1e-13]))
    assert np.allclose(sorted(set(np.round(sys.bohr, 9))), [-1.0, 0.0, 1.0])


# --- KMS completion --------------------------------------------------------------


def test_kms_scalar():
    full = kms_complete({1.0: np.array([[0.5]])}, 1.0)
    assert np.isclose(full[-1.0][0, 0], 0.5 * np.exp(-1))
    assert np.isclose(full[1.0][0, 0], 0.5)


def test_kms_matrix_transpose_and_psd():
    h = np.array([[1.0, 0.4 + 0.3j], [0.4 - 0.3j, 0.8]])
    full = kms_complete({2.0: h}, 0.7)
    assert np.allclose(full[-2.0], np.exp(-1.4) * h.T)
    assert np.linalg.eigvalsh(full[-2.0])[0] >= 0


def test_kms_high_temperature_limit():
    h = np.array([[1.0, 0.2j], [-0.2j, 0.5]])
    full = kms_complete({1.0: h}, 1e-12)
    assert np.allclose(full[-1.0], h.T)


def test_kms_errors():
    with pytest.raises(ValidationError):
        kms_complete({1.0: np.array([[1.0, 2.0], [2.0, 1.0]])}, 1.0)
    with pytest.raises(ValidationError):
        kms_complete({1.0: np.eye(1)}, 0.0)
    with pytest.raises(ValidationError):
        kms_complete({-1.0: np.eye(1)}, 1.0)
    with pytest.raises(ValidationError):
        kms_complete({0.0: np.array([[1.0, 0.5j], [-0.5j, 1.0]])}, 1.0)


def test_missing_frequency_raises():
    res = ReservoirSpec(1.0, (SX,), h={2.0: np.eye(1)})
    with pytest.raises(ValidationError, match="no spectral matrix"):
        build_sub(QUBIT, res)


# --- sub-Lindbladians ------------------------------------------------------------


def test_qubit_rates(qubit):
    sub = qubit.subs[0]
    down = sub.kraus_by_bohr[1.0][0]
    up = sub.kraus_by_bohr[-1.0][0]
    assert np.isclose(np.linalg.norm(down) ** 2, 1.0)
    assert np.isclose(np.linalg.norm(up) ** 2, np.exp(-1.0))
    assert np.allclose(lv.apply(lv.adjoint(sub.lind.generator), sub.rho_ref), 0, atol=1e-14)
    assert sorted(sub.modular_parts) == [-1.0, 1.0]
    assert sorted(qubit.subs[1].modular_parts) == [-2.0, 2.0]


def test_lamb_shift_only_is_hamiltonian():
    s = {1.0: np.array([[0.3]]), -1.0: np.array([[-0.2]])}
    sub = build_sub(QUBIT, ReservoirSpec(1.0, (SX,), h={0.0: np.zeros((1, 1)), 1.0: np.zeros((1, 1))}, s=s))
    X = random_matrix(np.random.default_rng(1), 2)
    T = sub.lind.T
    assert np.allclose(sub.lind(X), 1j * (T @ X - X @ T))
    V = jump_operators(SX, QUBIT)
    ref = 0.3 * V[1.0].conj().T @ V[1.0] - 0.2 * V[-1.0].conj().T @ V[-1.0]
    assert np.allclose(T, ref)


def _phi_reference(sys, res):
    Vs = [jump_operators(Q, sys) for Q in res.couplings]
    h_pos = {abs(w): res.h_positive(abs(w)) for w in Vs[0]}
    full = kms_complete(h_pos, res.beta)
    def phi(X):
        out = 0
        for w in Vs[0]:
            h = full[min(full, key=lambda v: abs(v - w))]
            for k in range(res.n):
                for l in range(res.n):
                    out = out + h[k, l] * Vs[k][w].conj().T @ X @ Vs[l][w]
        return out
    return phi


@pytest.mark.parametrize("name", ["qubit2r", "qutrit_generic"])
def test_kraus_family_reconstruction(models, name):
    m = models[name]
    rng = np.random.default_rng(3)
    for res, sub in zip(m.reservoirs, m.subs):
        ref = _phi_reference(m.system, res)
        for _ in range(3):
            X = random_matrix(rng, m.dim)
            assert np.allclose(sub.lind.phi(X), ref(X), atol=1e-12)


@given(seeds, st.floats(0.2, 3.0))
def test_random_reservoir_is_detailed_balanced(seed, beta):
    rng = np.random.default_rng(seed)
    sys = SystemSpec(np.diag([0.0, 0.9, 2.2]))
    Qs = (random_hermitian(rng, 3), random_hermitian(rng, 3))
    h = {}
    for w in sorted({abs(round(b, 12)) for b in sys.bohr}):
        A = random_matrix(rng, 2)
        hw = A @ A.conj().T
        h[w] = hw.real if w == 0 else hw
    sub = build_sub(sys, ReservoirSpec(beta, Qs, h=h))
    L = sub.lind
    assert np.allclose(L(np.eye(3)), 0, atol=1e-10)
    rho = gibbs_state(sys.H_S, beta)
    assert np.allclose(lv.rho_adjoint(L.phi.superop, rho), L.phi.superop, atol=1e-9)
    X = random_matrix(rng, 3)
    assert np.linalg.eigvalsh(lv.hermitian_part(dissipation(L, X, X)))[0] > -1e-9


# --- assembly --------------------------------------------------------------------


def test_qubit_flags(qubit):
    assert qubit.flags["er"] and qubit.flags["tri"] and qubit.flags["kms"]


def test_single_reservoir_steady_state_is_gibbs():
    m = assemble(QUBIT, [ReservoirSpec(1.3, (SX,), h=0.8)])
    assert np.allclose(steady_state(m), gibbs_state(QUBIT.H_S, 1.3), atol=1e-12)


def test_commuting_coupling_is_not_ergodic():
    m = assemble(QUBIT, [ReservoirSpec(1.0, (SZ,), h=1.0)])
    assert not m.flags["er"]
    assert not spohn_condition([SZ], QUBIT.H_S).passed


def test_reducible_fixture(reducible):
    assert not reducible.flags["er"]


def test_spohn_examples():
    assert spohn_condition([SX], QUBIT.H_S).passed
    rep = spohn_condition([SZ], QUBIT.H_S)
    assert not rep.passed and rep.residual == 1
    rep = spohn_condition([], np.diag([0.0, 1.0, 3.0]))
    assert not rep.passed and rep.residual == 2


def test_with_betas_recompletes(qubit):
    m = qubit.with_betas([1.5, 1.5])
    assert np.allclose(m.betas, [1.5, 1.5])
    assert np.allclose(steady_state(m), gibbs_state(QUBIT.H_S, 1.5), atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        assemble(QUBIT, [ReservoirSpec(1.0, (np.eye(3),))])
    with pytest.raises(ValidationError):
        assemble(QUBIT, [])
    with pytest.raises(ValidationError):
        ReservoirSpec(1.0, (np.array([[0, 1], [0, 0]]),))


def test_corpus_invariants(models):
    rng = np.random.default_rng(8)
    for m in models.values():
        L = m.total
        assert np.allclose(L(np.eye(m.dim)), 0, atol=1e-12)
        A = random_matrix(rng, m.dim)
        rho = A @ A.conj().T
        rho /= np.trace(rho)
        out = lv.apply(lv.adjoint(L.generator), rho)
        assert abs(np.trace(out)) < 1e-12
        if m.flags["real_inputs"]:
            assert m.flags["tri"]


def test_entropy_production_positive(qubit):
    assert entropy_production(qubit, steady_state(qubit)) > 1e-6
