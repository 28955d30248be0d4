"""Deformed generators and the entropic cumulant generating function.

For a model ``L = sum_j L_j`` in detailed balance with states ``rho_j`` the
deformed generator is

    L_(alpha)(X) = sum_j L_j(X rho_j^{-alpha_j}) rho_j^{alpha_j}
                 = K + sum_j sum_w exp(-alpha_j w) Phi_{j,w},

with ``K(X) = -K^dagger X - X K``, ``K = sum_j (Phi_j(1)/2 + i T_j)``. Its
dominant eigenvalue is ``e(alpha)``. Both forms are built and compared on
every call to :func:`deform`.

Sign conventions: ``de/dalpha_j(0) = rho_+(I_j)`` with ``I_j = L_j(S_j)`` and
``S_j = -log rho_j``; the mean entropy rates are ``varsigma_bar = -grad e(0)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liouville as lv
from .config import DEFAULT, Tolerances
from .davies import WeakCouplingModel
from .errors import HypothesisError, NumericalError
from .lindblad import KrausMap, dissipation

GRAD_STEP = 1e-5
HESS_STEP = 1e-3


def _maxabs(X) -> float:
    return float(np.max(np.abs(X), initial=0.0))


def _alpha(model, alpha) -> np.ndarray:
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.shape != (model.M,):
        raise ValueError(f"alpha must have {model.M} components, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class DeformedGenerator:
    alpha: np.ndarray
    matrix: np.ndarray
    phi: KrausMap  # Kraus family of the deformed jump part

    @property
    def generator(self) -> np.ndarray:
        return self.matrix


def no_jump_operator(model: WeakCouplingModel) -> np.ndarray:
    """``K = sum_j (Phi_j(1)/2 + i T_j)``."""
    return sum(0.5 * s.lind.phi_one + 1j * s.lind.T for s in model.subs)


def _no_jump_super(model) -> np.ndarray:
    K = no_jump_operator(model)
    return -lv.left(K.conj().T) - lv.right(K)


def deform_direct(model: WeakCouplingModel, alpha) -> np.ndarray:
    """``sum_j L_j(X rho_j^{-alpha_j}) rho_j^{alpha_j}`` as a superoperator."""
    a = _alpha(model, alpha)
    out = 0
    for aj, sub in zip(a, model.subs):
        rp = lv.state_power(sub.rho_ref, aj)
        rm = lv.state_power(sub.rho_ref, -aj)
        out = out + lv.right(rp) @ sub.lind.generator @ lv.right(rm)
    return out


def deform(model: WeakCouplingModel, alpha, check: bool = True,
           tol: Tolerances = DEFAULT) -> DeformedGenerator:
    a = _alpha(model, alpha)
    for sub in model.subs:
        if not sub.modular_parts and np.linalg.norm(sub.lind.phi.superop) > 0:
            raise HypothesisError("sub-Lindbladian has no modular decomposition")
    mat = _no_jump_super(model)
    ops = []
    for aj, sub in zip(a, model.subs):
        for w, part in sub.modular_parts.items():
            f = np.exp(-aj * w)
            mat = mat + f * part.superop
            ops.extend(np.sqrt(f) * V for V in part.kraus_ops)
    if check:
        direct = deform_direct(model, a)
        scale = max(1.0, _maxabs(mat))
        res = _maxabs(direct - mat)
        if res > 1e-9 * scale:
            raise NumericalError(f"deformation routes disagree by {res:.2e} at alpha={a}")
    if not ops:
        ops = [np.zeros((model.dim, model.dim), dtype=complex)]
    return DeformedGenerator(a, mat, KrausMap(tuple(ops)))


def deform_derivative(model: WeakCouplingModel, alpha, j: int) -> np.ndarray:
    """``d L_(alpha) / d alpha_j = sum_w (-w) exp(-alpha_j w) Phi_{j,w}``."""
    a = _alpha(model, alpha)
    sub = model.subs[j]
    n = model.dim ** 2
    out = np.zeros((n, n), dtype=complex)
    for w, part in sub.modular_parts.items():
        out += -w * np.exp(-a[j] * w) * part.superop
    return out


def _require_er(model):
    if not model.flags.get("er", False):
        raise HypothesisError("model is not ergodic (positivity improving check failed)")


def cgf_point(model: WeakCouplingModel, alpha, tol: Tolerances = DEFAULT,
              check: bool = False) -> lv.SpectralPoint:
    _require_er(model)
    L = deform(model, alpha, check=check, tol=tol)
    sp = lv.dominant_spectral_point(L.matrix, tol)
    if abs(sp.value.imag) > tol.eig * max(1.0, abs(sp.value)):
        raise NumericalError(f"dominant eigenvalue {sp.value} is not real")
    return sp


def cgf(model: WeakCouplingModel, alpha, tol: Tolerances = DEFAULT,
        check: bool = False) -> float:
    """``e(alpha)``: dominant eigenvalue of the deformed generator (simplicity checked)."""
    return float(cgf_point(model, alpha, tol, check).value.real)


def spectral_abscissa(model: WeakCouplingModel, alpha) -> float:
    """``max Re sp(L_(alpha))`` without ergodicity or simplicity requirements."""
    return lv.spectral_abscissa(deform(model, alpha, check=False).matrix)


def cgf_grad(model: WeakCouplingModel, alpha, tol: Tolerances = DEFAULT):
    """``(e(alpha), grad e(alpha))`` from the dominant eigenpair (first-order perturbation)."""
    sp = cgf_point(model, alpha, tol)
    g = np.empty(model.M)
    for j in range(model.M):
        dL = deform_derivative(model, alpha, j)
        g[j] = float(np.real(np.vdot(sp.left, dL @ sp.right)))
    return float(sp.value.real), g


def finite_time_cgf(model: WeakCouplingModel, rho: np.ndarray, t: float, alpha) -> float:
    """``log tr(rho e^{t L_(alpha)}(1))``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    L = deform(model, alpha, check=False)
    out = lv.semigroup_apply(L.matrix, t, np.eye(model.dim, dtype=complex))
    return float(np.log(np.real(np.trace(rho @ out))))


# --- steady state, fluxes, entropy ------------------------------------------


def steady_state(model: WeakCouplingModel, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Kernel of ``L^*`` normalized to a density matrix."""
    _require_er(model)
    Ld = lv.adjoint(model.total.generator)
    _, sv, vh = np.linalg.svd(Ld)
    scale = max(1.0, float(sv[0]))
    null = int(np.sum(sv <= tol.eig * scale))
    if null != 1:
        raise NumericalError(f"kernel of L* has dimension {null}, expected 1")
    v = vh[-1].conj()
    rho = lv.unvec(v)
    rho = lv.hermitian_part(rho / np.trace(rho))
    w = np.linalg.eigvalsh(rho)
    if w[0] <= 0:
        raise NumericalError(f"steady state is not faithful (min eigenvalue {w[0]:.3e})")
    return rho


@dataclass(frozen=True, eq=False)
class FluxSet:
    S: list
    I: list
    F: list
    J: list
    J_plus: list
    rho_plus: np.ndarray

    def mean(self, name: str) -> np.ndarray:
        ops = getattr(self, name)
        return np.array([np.real(np.trace(self.rho_plus @ X)) for X in ops])


def fluxes(model: WeakCouplingModel, rho_plus: np.ndarray | None = None,
           tol: Tolerances = DEFAULT) -> FluxSet:
    if rho_plus is None:
        rho_plus = steady_state(model, tol)
    d = model.dim
    one = np.eye(d)
    inv = lv.state_inv(rho_plus)
    S, I, F, J, Jp = [], [], [], [], []
    for sub in model.subs:
        Sj = sub.entropy_observable
        Ij = sub.lind(Sj)
        Fj = sub.lind(model.H_S)
        mean = np.real(np.trace(rho_plus @ Ij))
        Jpj = lv.apply(lv.adjoint(sub.lind.generator), Sj @ rho_plus) @ inv
        S.append(Sj)
        I.append(Ij)
        F.append(Fj)
        J.append(Ij - mean * one)
        Jp.append(Jpj)
    return FluxSet(S, I, F, J, Jp, rho_plus)


def entropy_production(model: WeakCouplingModel, rho: np.ndarray,
                       tol: Tolerances = DEFAULT) -> float:
    """``sigma(rho) = sum_j tr(L_j^*(rho) (log rho_j - log rho))``."""
    lv.check_faithful(rho, tol)
    log_rho = lv.state_log(rho)
    total = 0.0
    for sub in model.subs:
        drho = lv.apply(lv.adjoint(sub.lind.generator), rho)
        total += np.real(np.trace(drho @ (lv.state_log(sub.rho_ref) - log_rho)))
    return float(total)


# --- derivatives of e at the origin -------------------------------------------


@dataclass(frozen=True)
class DerivativeCheck:
    value: np.ndarray  # analytic/perturbative route
    finite_difference: np.ndarray

    @property
    def residual(self) -> float:
        return _maxabs(self.value - self.finite_difference)


def cgf_gradient0(model: WeakCouplingModel, step: float = GRAD_STEP, atol: float = 1e-6,
                  tol: Tolerances = DEFAULT) -> DerivativeCheck:
    """``grad e(0) = (rho_+(I_j))_j``, cross-checked by central differences."""
    fl = fluxes(model, tol=tol)
    pert = fl.mean("I")
    fd = np.empty(model.M)
    for j in range(model.M):
        e = np.zeros(model.M)
        e[j] = step
        fd[j] = (cgf(model, e, tol) - cgf(model, -e, tol)) / (2 * step)
    out = DerivativeCheck(pert, fd)
    if out.residual > atol:
        raise NumericalError(f"gradient routes disagree by {out.residual:.2e}")
    return out


def hessian_fd(f, M: int, step: float = HESS_STEP, richardson: bool = True) -> np.ndarray:
    """Central second differences of ``f`` at 0, optionally Richardson-refined."""

    def raw(h):
        H = np.empty((M, M))
        f0 = f(np.zeros(M))
        for j in range(M):
            e = np.zeros(M)
            e[j] = h
            H[j, j] = (f(e) - 2 * f0 + f(-e)) / h ** 2
            for k in range(j):
                ek = np.zeros(M)
                ek[k] = h
                H[j, k] = H[k, j] = (f(e + ek) - f(e - ek) - f(ek - e) + f(-e - ek)) / (4 * h * h)
        return H

    if not richardson:
        return raw(step)
    return (4 * raw(step / 2) - raw(step)) / 3


def drazin_apply(L: np.ndarray, rho_plus: np.ndarray, X: np.ndarray,
                 tol: Tolerances = DEFAULT, kernel: np.ndarray | None = None) -> np.ndarray:
    """``Y = int_0^inf e^{tL}(X) dt`` for centered ``X`` (``tr(rho_+ X) = 0``).

    Solves ``L(Y) = -X`` together with ``tr(rho_+ Y) = 0`` as a bordered system.
    ``kernel`` is the right null vector of ``L`` (the identity for a Heisenberg
    generator); pass the steady state and ``rho_plus = 1`` for ``L^*``.
    """
    X = np.asarray(X, dtype=complex)
    d = X.shape[0]
    scale = max(1.0, _maxabs(X))
    if abs(np.trace(rho_plus @ X)) > 1e-9 * scale:
        raise ValueError("drazin_apply needs a centered operator: tr(rho_+ X) != 0")
    n = d * d
    A = np.zeros((n + 1, n + 1), dtype=complex)
    A[:n, :n] = L
    A[:n, n] = lv.vec(np.eye(d) if kernel is None else kernel)
    A[n, :n] = lv.vec(rho_plus.T)
    b = np.zeros(n + 1, dtype=complex)
    b[:n] = -lv.vec(X)
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("restricted generator is singular") from exc
    Y = lv.unvec(sol[:n], d)
    res = _maxabs(lv.apply(L, Y) + X)
    if res > 1e-8 * scale * max(1.0, _maxabs(Y)):
        raise NumericalError(f"drazin solve residual {res:.2e}")
    return Y


def _tr(rho, X) -> float:
    return float(np.real(np.trace(rho @ X)))


def hessian_integral(model: WeakCouplingModel, fl: FluxSet | None = None,
                     tol: Tolerances = DEFAULT) -> np.ndarray:
    """Second derivatives of ``e`` at 0 from time-integrated flux correlations.

    ``-int rho_+(e^{tL}(J_j) J_k^+ + e^{tL}(J_k) J_j^+) dt
      + int rho_+(L_k(e^{tL}(J_j) S_k) + L_j(e^{tL}(J_k) S_j)) dt
      + delta_jk rho_+(D_j(S_j, S_j))``
    """
    if fl is None:
        fl = fluxes(model, tol=tol)
    rp = fl.rho_plus
    L = model.total.generator
    Y = [drazin_apply(L, rp, Jj, tol) for Jj in fl.J]
    M = model.M
    H = np.empty((M, M))
    for j in range(M):
        for k in range(M):
            val = -_tr(rp, Y[j] @ fl.J_plus[k]) - _tr(rp, Y[k] @ fl.J_plus[j])
            val += _tr(rp, model.subs[k].lind(Y[j] @ fl.S[k]))
            val += _tr(rp, model.subs[j].lind(Y[k] @ fl.S[j]))
            if j == k:
                sub = model.subs[j]
                val += _tr(rp, dissipation(sub.lind, fl.S[j], fl.S[j]))
            H[j, k] = val
    return H


def cgf_hessian0(model: WeakCouplingModel, step: float = HESS_STEP, atol: float = 1e-5,
                 tol: Tolerances = DEFAULT) -> DerivativeCheck:
    """Hessian of ``e`` at 0: integral formula (``value``) and finite differences."""
    fd = hessian_fd(lambda a: cgf(model, a, tol), model.M, step)
    integral = hessian_integral(model, tol=tol)
    out = DerivativeCheck(integral, fd)
    if out.residual > atol:
        raise NumericalError(f"Hessian routes disagree by {out.residual:.2e}")
    return out


def energetic_cgf(model: WeakCouplingModel, alpha, tol: Tolerances = DEFAULT) -> float:
    """``chi(alpha) = e(-alpha / beta)``."""
    a = _alpha(model, alpha)
    return cgf(model, -a / model.betas, tol)
