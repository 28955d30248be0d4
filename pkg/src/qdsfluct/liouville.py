"""Dense linear algebra on B(H) and on Liouville space.

Operators are ``(d, d)`` complex arrays. Superoperators are ``(d*d, d*d)``
complex arrays acting on column-stacked vectors::

    vec(X) = X.reshape(-1, order="F")      # (x00, x10, ..., x01, x11, ...)
    vec(A @ X @ B) = kron(B.T, A) @ vec(X)

The same convention is used everywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances
from .errors import DegenerateEigenvalueError, DimensionError, NotFaithfulError


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((d, d), order="F")


def super_dim(S: np.ndarray) -> int:
    n = S.shape[0]
    d = int(round(np.sqrt(n)))
    if S.shape != (n, n) or d * d != n:
        raise DimensionError(f"shape {S.shape} is not a superoperator shape")
    return d


def apply(S: np.ndarray, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    d = X.shape[0]
    if S.shape != (d * d, d * d):
        raise DimensionError(f"superoperator {S.shape} cannot act on {X.shape} operator")
    return unvec(S @ vec(X), d)


def identity(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


def _check_pair(X: np.ndarray, Y: np.ndarray) -> None:
    if np.shape(X) != np.shape(Y) or np.ndim(X) != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"operator shapes {np.shape(X)} and {np.shape(Y)} do not match")


def hs_inner(X: np.ndarray, Y: np.ndarray) -> complex:
    """Hilbert-Schmidt pairing ``tr(X^dagger Y)``."""
    _check_pair(X, Y)
    return complex(np.vdot(X, Y))


def sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator ``X -> A @ X @ B``."""
    _check_pair(A, B)
    return np.kron(np.asarray(B).T, np.asarray(A)).astype(complex, copy=False)


def left(A: np.ndarray) -> np.ndarray:
    return sandwich(A, np.eye(A.shape[0]))


def right(B: np.ndarray) -> np.ndarray:
    return sandwich(np.eye(B.shape[0]), B)


def commutator(A: np.ndarray) -> np.ndarray:
    """Superoperator ``X -> [A, X]``."""
    return left(A) - right(A)


def kraus_super(ops) -> np.ndarray:
    """Superoperator of ``X -> sum_V V^dagger X V`` (Heisenberg picture)."""
    ops = list(ops)
    d = ops[0].shape[0]
    S = np.zeros((d * d, d * d), dtype=complex)
    for V in ops:
        S += sandwich(V.conj().T, V)
    return S


def adjoint(S: np.ndarray) -> np.ndarray:
    """Adjoint with respect to the Hilbert-Schmidt inner product."""
    return np.asarray(S).conj().T


# --- Hermitian functional calculus ------------------------------------------


def is_hermitian(X: np.ndarray, tol: float = DEFAULT.herm) -> bool:
    return bool(np.max(np.abs(X - X.conj().T), initial=0.0) <= tol)


def hermitian_part(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def herm_func(X: np.ndarray, f) -> np.ndarray:
    w, U = np.linalg.eigh(hermitian_part(X))
    return (U * f(w)) @ U.conj().T


def check_faithful(rho: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Return the eigenvalues of ``rho`` or raise if it is not faithful."""
    if not is_hermitian(rho, max(tol.herm, 1e-10)):
        raise NotFaithfulError("reference state is not Hermitian")
    w = np.linalg.eigvalsh(hermitian_part(rho))
    if w[0] <= tol.faithful:
        raise NotFaithfulError(f"state is not faithful (min eigenvalue {w[0]:.3e})")
    return w


def is_state(rho: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    if not is_hermitian(rho, tol.herm):
        return False
    w = np.linalg.eigvalsh(hermitian_part(rho))
    return bool(w[0] >= -tol.psd and abs(w.sum() - 1.0) <= tol.trace)


def state_power(rho: np.ndarray, a: float) -> np.ndarray:
    return herm_func(rho, lambda w: w ** a)


def state_log(rho: np.ndarray) -> np.ndarray:
    return herm_func(rho, np.log)


def state_inv(rho: np.ndarray) -> np.ndarray:
    return herm_func(rho, lambda w: 1.0 / w)


def rho_adjoint(S: np.ndarray, rho: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Adjoint of ``S`` for the inner product ``<X|Y>_rho = tr(rho X^dagger Y)``.

    Realized as ``S^rho(X) = S^*(X rho) rho^{-1}``.
    """
    check_faithful(rho, tol)
    return right(state_inv(rho)) @ adjoint(S) @ right(rho)


# --- modular structure -------------------------------------------------------


def cluster(values, tol: float) -> list[list[int]]:
    """Group indices of real ``values`` whose gaps are at most ``tol`` (single linkage)."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def eigenprojections(X: np.ndarray, tol: Tolerances = DEFAULT):
    """Distinct eigenvalues and spectral projections of a Hermitian matrix.

    Eigenvalues closer than ``tol.bohr`` times the spectral diameter are merged.
    """
    w, U = np.linalg.eigh(hermitian_part(X))
    diam = float(w[-1] - w[0]) if w.size > 1 else 0.0
    groups = cluster(w, tol.bohr * max(diam, 1.0))
    values, projs = [], []
    for g in groups:
        values.append(float(np.mean(w[g])))
        Ug = U[:, g]
        projs.append(Ug @ Ug.conj().T)
    return np.array(values), projs


@dataclass(frozen=True)
class ModularComponent:
    omega: float
    pairs: tuple  # (left index, right index) into the eigenprojection list
    projector: np.ndarray  # superoperator X -> sum P_l X P_r


def bohr_components(values, projs, tol: Tolerances = DEFAULT) -> list[ModularComponent]:
    """Spectral decomposition of ``X -> [A, X]`` for ``A = sum_l values[l] P_l``.

    Component ``omega`` collects all pairs with ``values[l] - values[r] == omega``
    (clustered); its projector is ``X -> sum P_l X P_r``.
    """
    n = len(values)
    diffs = [(values[l] - values[r], l, r) for l in range(n) for r in range(n)]
    diam = 2.0 * (max(values) - min(values)) if n > 1 else 0.0
    groups = cluster([x[0] for x in diffs], tol.bohr * max(diam, 1.0))
    out = []
    for g in groups:
        members = [diffs[i] for i in g]
        omega = float(np.mean([m[0] for m in members]))
        if abs(omega) <= tol.bohr * max(diam, 1.0):
            omega = 0.0
        P = sum(sandwich(projs[l], projs[r]) for _, l, r in members)
        out.append(ModularComponent(omega, tuple((l, r) for _, l, r in members), P))
    return out


def modular_superops(rho: np.ndarray, tol: Tolerances = DEFAULT):
    """Modular operator ``Delta(X) = rho X rho^{-1}`` and the spectral resolution of its log.

    Returns ``(Delta, [(omega, P_omega), ...])`` with omegas sorted ascending.
    """
    check_faithful(rho, tol)
    delta = sandwich(rho, state_inv(rho))
    values, projs = eigenprojections(state_log(rho), tol)
    comps = bohr_components(values, projs, tol)
    return delta, [(c.omega, c.projector) for c in comps]


# --- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class SpectralPoint:
    """Dominant eigenvalue of a (super)operator with its biorthonormal eigenvectors.

    ``right`` and ``left`` are plain vectors; ``right_op``/``left_op`` reshape them
    into operators when the matrix acts on a Liouville space.
    """

    value: complex
    right: np.ndarray
    left: np.ndarray
    gap: float

    @property
    def right_op(self) -> np.ndarray:
        return unvec(self.right)

    @property
    def left_op(self) -> np.ndarray:
        return unvec(self.left)


def spectral_abscissa(S: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(S).real))


def dominant_spectral_point(S: np.ndarray, tol: Tolerances = DEFAULT) -> SpectralPoint:
    """Eigenvalue with the largest real part, checked to be simple and isolated.

    Raises :class:`DegenerateEigenvalueError` when another eigenvalue lies on the
    line ``Re z = Re value`` within ``tol.eig`` (scaled by ``max(1, |S|)``).
    """
    S = np.asarray(S, dtype=complex)
    n = S.shape[0]
    w, vl, vr = scipy.linalg.eig(S, left=True, right=True)
    i = int(np.argmax(w.real))
    lead = w[i]
    scale = max(1.0, float(np.linalg.norm(S, 2))) if n else 1.0
    rest = np.delete(w, i)
    on_line = np.abs(rest.real - lead.real) <= tol.eig * scale
    if np.any(on_line):
        raise DegenerateEigenvalueError(
            f"dominant eigenvalue {lead:.6g} is not simple: "
            f"{int(on_line.sum())} other eigenvalue(s) on Re z = {lead.real:.6g}"
        )
    gap = float(lead.real - rest.real.max()) if rest.size else np.inf
    r = vr[:, i]
    l = vl[:, i]
    # left eigvec y satisfies y^H S = lead y^H; normalize <y|r> = 1
    r = r / np.linalg.norm(r)
    pairing = np.vdot(l, r)
    if abs(pairing) < 1e-300:
        raise DegenerateEigenvalueError("left and right eigenvectors are orthogonal (defective eigenvalue)")
    l = l / np.conj(pairing)
    return SpectralPoint(complex(lead), r, l, gap)


def semigroup(S: np.ndarray, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("semigroup time must be non-negative")
    return scipy.linalg.expm(t * np.asarray(S))


def semigroup_apply(S: np.ndarray, t: float, X: np.ndarray) -> np.ndarray:
    """``e^{tS}(X)`` by scaling and squaring."""
    if t == 0:
        return np.array(X, dtype=complex)
    return apply(semigroup(S, t), X)
