"""Linear response near a common temperature: kinetic coefficients three ways.

``L_jk = d phibar_j / d zeta_k`` at ``zeta = 0`` where reservoir ``j`` sits at
``beta_0 - zeta_j`` and ``phibar_j = rho_+(L_j(H_S))``. The correlation-integral
and Hessian routes below carry the sign that makes them equal to this
derivative (and hence positive semi-definite, with ``D = 2L``)::

    L_jk = -int_0^inf rho_0(e^{tL}(F_j) F_k) dt + 1/2 delta_jk rho_0(D_j(H_S, H_S))
         = 1/2 d^2 chi / d alpha_j d alpha_k (0)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liouville as lv
from .config import DEFAULT, Tolerances
from .davies import WeakCouplingModel
from .errors import HypothesisError
from .fcs import drazin_apply, energetic_cgf, fluxes, hessian_fd
from .lindblad import dissipation

EQUILIBRIUM_TOL = 1e-12
ZETA_STEP = 1e-4

METHODS = ("finite_difference_zeta", "green_kubo", "hessian_symmetry", "lebowitz_spohn")


@dataclass(frozen=True)
class TransportMatrix:
    L: np.ndarray
    method: str

    @property
    def column_sums(self) -> np.ndarray:
        return self.L.sum(axis=0)

    @property
    def onsager_residual(self) -> float:
        return float(np.max(np.abs(self.L - self.L.T)))

    @property
    def conservation_residual(self) -> float:
        return float(np.max(np.abs(self.column_sums)))


def _beta0(model: WeakCouplingModel) -> float:
    b = model.betas
    if np.max(np.abs(b - b[0])) > EQUILIBRIUM_TOL:
        raise HypothesisError(f"model is not at a common temperature: beta = {b.tolist()}")
    return float(b[0])


def kinetic_coefficients(model: WeakCouplingModel, beta0: float, dzeta: float = ZETA_STEP,
                         tol: Tolerances = DEFAULT) -> TransportMatrix:
    """Central differences of the steady energy fluxes in ``zeta``.

    Each reservoir keeps its positive-frequency spectral data and is KMS-completed
    again at ``beta_0 - zeta_j``.
    """
    M = model.M

    def phibar(z):
        m = model.with_betas(beta0 - z)
        if not m.flags.get("er", False):
            raise HypothesisError(f"ergodicity fails at zeta = {z.tolist()}")
        return fluxes(m, tol=tol).mean("F")

    L = np.empty((M, M))
    for k in range(M):
        e = np.zeros(M)
        e[k] = dzeta
        L[:, k] = (phibar(e) - phibar(-e)) / (2 * dzeta)
    return TransportMatrix(L, "finite_difference_zeta")


def correlation_integrals(model: WeakCouplingModel, tol: Tolerances = DEFAULT) -> np.ndarray:
    """``C_jk = int_0^inf rho_0(e^{tL}(F_j) F_k) dt``."""
    _beta0(model)
    fl = fluxes(model, tol=tol)
    r0 = fl.rho_plus
    Y = [drazin_apply(model.total.generator, r0, F, tol) for F in fl.F]
    M = model.M
    return np.array([[np.real(np.trace(r0 @ Y[j] @ fl.F[k])) for k in range(M)] for j in range(M)])


def dissipation_terms(model: WeakCouplingModel) -> np.ndarray:
    """``rho_0(D_j(H_S, H_S))`` per reservoir."""
    r0 = fluxes(model).rho_plus
    H = model.H_S
    return np.array([np.real(np.trace(r0 @ dissipation(s.lind, H, H))) for s in model.subs])


def green_kubo_matrix(model: WeakCouplingModel, tol: Tolerances = DEFAULT) -> TransportMatrix:
    C = correlation_integrals(model, tol)
    return TransportMatrix(-C + 0.5 * np.diag(dissipation_terms(model)), "green_kubo")


def hessian_route(model: WeakCouplingModel, tol: Tolerances = DEFAULT) -> TransportMatrix:
    """``1/2`` the Hessian of the energetic CGF at the origin."""
    _beta0(model)
    H = hessian_fd(lambda a: energetic_cgf(model, a, tol), model.M)
    return TransportMatrix(0.5 * H, "hessian_symmetry")


def lebowitz_spohn_matrix(model: WeakCouplingModel, tol: Tolerances = DEFAULT) -> TransportMatrix:
    """Response of the steady state in the Schrodinger picture.

    ``d rho_+ / d zeta_k = -int e^{tL^*}(F_k rho_0) dt`` (up to multiples of
    ``rho_0``), so ``L_jk = tr(F_j d rho_+/d zeta_k)`` for ``j != k``; the diagonal
    follows from conservation of energy.
    """
    _beta0(model)
    fl = fluxes(model, tol=tol)
    r0 = fl.rho_plus
    d = model.dim
    Ls = lv.adjoint(model.total.generator)
    M = model.M
    L = np.empty((M, M))
    for k in range(M):
        Z = drazin_apply(Ls, np.eye(d), fl.F[k] @ r0, tol, kernel=r0)
        for j in range(M):
            L[j, k] = -np.real(np.trace(fl.F[j] @ Z))
    for k in range(M):
        L[k, k] = -sum(L[j, k] for j in range(M) if j != k)
    return TransportMatrix(L, "lebowitz_spohn")


def transport(model: WeakCouplingModel, method: str = "green_kubo", dzeta: float = ZETA_STEP,
              tol: Tolerances = DEFAULT) -> TransportMatrix:
    if method == "finite_difference_zeta":
        return kinetic_coefficients(model, _beta0(model), dzeta, tol)
    if method == "green_kubo":
        return green_kubo_matrix(model, tol)
    if method == "hessian_symmetry":
        return hessian_route(model, tol)
    if method == "lebowitz_spohn":
        return lebowitz_spohn_matrix(model, tol)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
