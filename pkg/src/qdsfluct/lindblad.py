"""Lindbladians in Lindblad/Kraus form and structural checkers.

Everything here is in the Heisenberg picture: a Kraus family ``{V}`` acts as
``Phi(X) = sum V^dagger X V`` and a Lindbladian as
``L(X) = i[T, X] - 1/2 {Phi(1), X} + Phi(X)``.

Two notions of detailed balance are exposed. :func:`detailed_balance_check`
tests the decomposition it is handed (is *this* ``Phi`` rho-self-adjoint?),
while :func:`detailed_balance_normal_form` looks for *some* decomposition with
that property by averaging over the modular group.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import liouville as lv
from .config import DEFAULT, Tolerances
from .errors import HypothesisError, ValidationError


@dataclass(frozen=True)
class PropertyReport:
    name: str
    passed: bool | None  # None: inconclusive
    residual: float
    details: object = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": None if self.passed is None else bool(self.passed),
                "residual": float(self.residual), "details": self.details}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __bool__(self) -> bool:
        return bool(self.passed)


def _maxabs(X) -> float:
    return float(np.max(np.abs(X), initial=0.0))


# --- data structures ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausMap:
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(V, dtype=complex) for V in self.kraus_ops)
        if not ops:
            raise ValueError("a Kraus family needs at least one operator (use a zero matrix)")
        d = ops[0].shape[0]
        if any(V.shape != (d, d) for V in ops):
            raise ValueError("Kraus operators must all be square of the same size")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @cached_property
    def superop(self) -> np.ndarray:
        return lv.kraus_super(self.kraus_ops)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return sum(V.conj().T @ X @ V for V in self.kraus_ops)

    def pruned(self, tol: float = DEFAULT.prune) -> list:
        return [V for V in self.kraus_ops if np.linalg.norm(V) > tol]


@dataclass(frozen=True, eq=False)
class Lindbladian:
    T: np.ndarray
    phi: KrausMap

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @cached_property
    def phi_one(self) -> np.ndarray:
        return self.phi(np.eye(self.dim, dtype=complex))

    @cached_property
    def generator(self) -> np.ndarray:
        G = self.phi_one
        return (1j * lv.commutator(self.T)
                - 0.5 * (lv.left(G) + lv.right(G))
                + self.phi.superop)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return lv.apply(self.generator, X)

    def __add__(self, other: "Lindbladian") -> "Lindbladian":
        return Lindbladian(self.T + other.T,
                           KrausMap(self.phi.kraus_ops + other.phi.kraus_ops))


@dataclass(frozen=True, eq=False)
class SubLindbladian:
    """A Lindbladian in detailed balance with a faithful reference state.

    ``modular_parts`` maps each entropy quantum ``omega`` (an eigenvalue of
    ``[log rho, .]``) to the Kraus family of ``Phi_omega``.
    """

    rho_ref: np.ndarray
    lind: Lindbladian
    modular_parts: Mapping[float, KrausMap] = field(default_factory=dict)

    @cached_property
    def entropy_observable(self) -> np.ndarray:
        return -lv.state_log(self.rho_ref)


@dataclass(frozen=True)
class TimeReversal:
    """Anti-unitary involution ``theta = U K`` (K: complex conjugation).

    Acts on operators as ``Theta(X) = theta X theta = U conj(X) conj(U)``.
    """

    U: np.ndarray

    @classmethod
    def conjugation(cls, d: int) -> "TimeReversal":
        return cls(np.eye(d, dtype=complex))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.U @ np.conj(X) @ np.conj(self.U)

    def involution_residual(self) -> float:
        d = self.U.shape[0]
        return _maxabs(self.U @ np.conj(self.U) - np.eye(d))


# --- construction ------------------------------------------------------------


def lindblad_generator(T: np.ndarray, phi: KrausMap | Sequence[np.ndarray],
                       tol: Tolerances = DEFAULT) -> Lindbladian:
    T = np.asarray(T, dtype=complex)
    if not lv.is_hermitian(T, max(tol.herm, 1e-12 * max(1.0, _maxabs(T)))):
        raise ValidationError("Hamiltonian part T must be Hermitian")
    if not isinstance(phi, KrausMap):
        phi = KrausMap(tuple(phi))
    if phi.dim != T.shape[0]:
        raise ValidationError("T and Kraus operators have different dimensions")
    return Lindbladian(lv.hermitian_part(T), phi)


def dissipation(L: Lindbladian, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``D(X, Y) = L(X^dagger Y) - L(X^dagger) Y - X^dagger L(Y)``."""
    Xd = X.conj().T
    return L(Xd @ Y) - L(Xd) @ Y - Xd @ L(Y)


# --- checkers ----------------------------------------------------------------


def choi_matrix(S: np.ndarray) -> np.ndarray:
    """``C = sum_ab E_ab (x) S(E_ab)``."""
    d = lv.super_dim(S)
    C = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            C += np.kron(E, lv.apply(S, E))
    return C


def choi_is_cp(S: np.ndarray, tol: Tolerances = DEFAULT) -> PropertyReport:
    C = choi_matrix(S)
    scale = max(1.0, float(np.linalg.norm(C, 2)))
    nonherm = _maxabs(C - C.conj().T)
    w = np.linalg.eigvalsh(lv.hermitian_part(C))
    residual = max(0.0, -float(w[0]))
    passed = residual <= tol.psd * scale and nonherm <= tol.psd * scale
    return PropertyReport("complete_positivity", passed, residual,
                          f"min Choi eigenvalue {w[0]:.3e}, non-Hermiticity {nonherm:.1e}")


def _scale(L: Lindbladian) -> float:
    return max(1.0, _maxabs(L.generator))


def detailed_balance_check(rho: np.ndarray, L: Lindbladian,
                           tol: Tolerances = DEFAULT) -> PropertyReport:
    lv.check_faithful(rho, tol)
    stat = _maxabs(lv.apply(lv.adjoint(L.generator), rho))
    phi = L.phi.superop
    selfadj = _maxabs(lv.rho_adjoint(phi, rho, tol) - phi)
    residual = max(stat, selfadj)
    passed = residual <= tol.check * _scale(L)
    return PropertyReport("detailed_balance", passed, residual,
                          f"|L*(rho)| = {stat:.2e}, |Phi^rho - Phi| = {selfadj:.2e}")


@dataclass(frozen=True)
class NormalForm:
    report: PropertyReport
    T: np.ndarray | None = None
    phi: np.ndarray | None = None  # superoperator


def _commutator_basis(d: int) -> np.ndarray:
    """Columns: vec of the superoperator ``i[E_ab, .]`` for each matrix unit E_ab."""
    cols = []
    for b in range(d):
        for a in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            cols.append((1j * lv.commutator(E)).reshape(-1))
    return np.array(cols).T


def detailed_balance_normal_form(rho: np.ndarray, L: Lindbladian,
                                 tol: Tolerances = DEFAULT) -> NormalForm:
    """Decomposition-independent detailed-balance test.

    Averages the CP part over the modular group (block projection
    ``Xi = sum_w P_w Psi P_w``) and rho-symmetrizes it. Succeeds iff the
    rho-anti-Hermitian part of ``L`` is a commutator ``i[T', .]``; then
    ``L = i[T', .] - 1/2{Phi'(1), .} + Phi'`` with ``Phi'`` rho-self-adjoint.
    """
    lv.check_faithful(rho, tol)
    gate = tol.check * _scale(L)
    stat = _maxabs(lv.apply(lv.adjoint(L.generator), rho))
    if stat > gate:
        raise HypothesisError(f"rho is not stationary: |L*(rho)| = {stat:.2e}")
    d = L.dim
    Lgen = L.generator
    Lh = 0.5 * (Lgen - lv.rho_adjoint(Lgen, rho, tol))
    A = _commutator_basis(d)
    coef, *_ = np.linalg.lstsq(A, Lh.reshape(-1), rcond=None)
    T = lv.hermitian_part(coef.reshape((d, d), order="F"))
    T = T - np.trace(T).real / d * np.eye(d)
    hres = _maxabs(1j * lv.commutator(T) - Lh)
    if hres > gate:
        return NormalForm(PropertyReport(
            "detailed_balance_normal_form", False, hres,
            "rho-anti-Hermitian part of L is not of the form i[T, .]"))

    _, comps = lv.modular_superops(rho, tol)
    psi = L.phi.superop
    xi = sum(P @ psi @ P for _, P in comps)
    phi = 0.5 * (xi + lv.rho_adjoint(xi, rho, tol))
    G = lv.apply(phi, np.eye(d))
    rebuilt = 1j * lv.commutator(T) - 0.5 * (lv.left(G) + lv.right(G)) + phi
    rres = _maxabs(rebuilt - Lgen)
    sres = _maxabs(lv.rho_adjoint(phi, rho, tol) - phi)
    residual = max(hres, rres, sres)
    passed = residual <= gate
    report = PropertyReport("detailed_balance_normal_form", passed, residual,
                            f"commutator fit {hres:.1e}, reconstruction {rres:.1e}, "
                            f"rho-symmetry {sres:.1e}")
    return NormalForm(report, T, phi)


def modular_parts(rho: np.ndarray, phi: KrausMap, tol: Tolerances = DEFAULT) -> dict:
    """Split ``phi`` into ``{omega: Phi_omega}`` along the modular spectrum of ``rho``.

    The Kraus operators of ``Phi_omega`` are the modular components
    ``V_omega = sum_{l - r = omega} P_l V P_r`` of each Kraus operator ``V``
    (``P_l`` eigenprojections of ``log rho``).
    """
    values, projs = lv.eigenprojections(lv.state_log(rho), tol)
    comps = lv.bohr_components(values, projs, tol)
    parts = {}
    for c in comps:
        ops = []
        for V in phi.kraus_ops:
            Vw = sum(projs[l] @ V @ projs[r] for l, r in c.pairs)
            if np.linalg.norm(Vw) > tol.prune:
                ops.append(Vw)
        if ops:
            parts[c.omega] = KrausMap(tuple(ops))
    return parts


def modular_decompose(rho: np.ndarray, L: Lindbladian,
                      tol: Tolerances = DEFAULT) -> SubLindbladian:
    report = detailed_balance_check(rho, L, tol)
    if not report.passed:
        raise HypothesisError(f"detailed balance violated ({report.details})")
    return SubLindbladian(np.asarray(rho, dtype=complex), L, modular_parts(rho, L.phi, tol))


def time_reversal_check(theta: TimeReversal, rho: np.ndarray, L: Lindbladian,
                        tol: Tolerances = DEFAULT) -> PropertyReport:
    if theta.involution_residual() > 1e-10:
        raise ValidationError("time reversal is not an involution (U conj(U) != 1)")
    lv.check_faithful(rho, tol)
    d = L.dim
    Lrho = lv.rho_adjoint(L.generator, rho, tol)
    res = 0.0
    # both sides are antilinear, so matrix units suffice
    for a in range(d):
        for b in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            res = max(res, _maxabs(lv.apply(Lrho, theta(E)) - theta(L(E))))
    state_res = _maxabs(theta(rho) - rho)
    residual = max(res, state_res)
    passed = residual <= tol.check * _scale(L)
    return PropertyReport("time_reversal", passed, residual,
                          f"|L^rho Theta - Theta L| = {res:.2e}, |Theta(rho) - rho| = {state_res:.2e}")


def generated_algebra_dim(ops: Sequence[np.ndarray], tol: Tolerances = DEFAULT) -> int:
    """Dimension of the unital algebra generated by ``ops`` (breadth-first word closure)."""
    gens = [np.asarray(V, dtype=complex) for V in ops if np.linalg.norm(V) > tol.prune]
    d = np.shape(ops[0])[0] if len(ops) else 1
    basis: list[np.ndarray] = []
    mats: list[np.ndarray] = []

    def add(X) -> bool:
        v = lv.vec(X)
        nv = np.linalg.norm(v)
        if nv == 0:
            return False
        r = v.copy()
        for _ in range(2):  # re-orthogonalize once for stability
            for q in basis:
                r -= np.vdot(q, r) * q
        nr = np.linalg.norm(r)
        if nr <= tol.rank * nv:
            return False
        basis.append(r / nr)
        mats.append(X)
        return True

    frontier = [X for X in [np.eye(d, dtype=complex)] + gens if add(X)]
    for _ in range(d * d):
        if not frontier or len(basis) == d * d:
            break
        nxt = []
        for V in gens:
            for X in frontier:
                Y = V @ X
                if add(Y):
                    nxt.append(Y)
        frontier = nxt
    return len(basis)


def irreducible(phi: KrausMap | Sequence[np.ndarray], tol: Tolerances = DEFAULT) -> PropertyReport:
    ops = phi.kraus_ops if isinstance(phi, KrausMap) else list(phi)
    d = np.shape(ops[0])[0]
    dim = generated_algebra_dim(ops, tol)
    passed = dim == d * d
    return PropertyReport("irreducibility", passed, float(d * d - dim),
                          f"generated algebra has dimension {dim} of {d * d}")


def positivity_improving_check(L, seed: int = 0, t: float = 1.0, samples: int = 20,
                               tol: Tolerances = DEFAULT) -> PropertyReport:
    """Irreducibility of the Kraus part plus a numerical witness on random pure states.

    ``L`` is anything with ``.generator`` (superoperator) and ``.phi`` (KrausMap),
    e.g. a :class:`Lindbladian` or a deformed generator.
    """
    irr = irreducible(L.phi, tol)
    d = L.phi.dim
    rng = np.random.default_rng(seed)
    E = lv.semigroup(L.generator, t)
    worst = np.inf
    for _ in range(samples):
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        out = lv.apply(E, np.outer(psi, psi.conj()))
        worst = min(worst, float(np.linalg.eigvalsh(lv.hermitian_part(out))[0]))
    witness = worst > 1e-12
    passed = irr.passed and witness
    # missing algebra dimensions, or how far the witness is from strict positivity
    residual = max(irr.residual, 0.0 if witness else 1e-12 - worst)
    return PropertyReport("positivity_improving", passed, residual,
                          f"{irr.details}; min eigenvalue of e^(tL)(|psi><psi|) over "
                          f"{samples} pure states at t={t}: {worst:.3e}")
