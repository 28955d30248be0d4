"""Weak-coupling (Davies) generators for a system coupled to thermal reservoirs.

Reservoir spectral data ``h(omega)`` are inputs given on ``omega >= 0``; the
negative side is always filled in by the KMS relation
``h(-omega) = exp(-beta omega) h(omega)^T``, so every assembled model is in
detailed balance with the Gibbs states by construction. Lamb-shift matrices
``s(omega)`` default to zero. Units: hbar = k_B = 1.

The reservoir correlation functions themselves are not computed here; any
PSD table is accepted as admissible input.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import liouville as lv
from .config import DEFAULT, Tolerances
from .errors import HypothesisError, ValidationError
from .lindblad import (KrausMap, Lindbladian, PropertyReport, SubLindbladian, TimeReversal,
                       detailed_balance_check, lindblad_generator, positivity_improving_check,
                       time_reversal_check)


def _freq_tol(omega: float) -> float:
    return 1e-9 * max(1.0, abs(omega))


def _lookup(table: Mapping[float, np.ndarray], omega: float):
    for key, val in table.items():
        if abs(key - omega) <= _freq_tol(omega):
            return val
    return None


@dataclass(frozen=True, eq=False)
class SystemSpec:
    H_S: np.ndarray
    tol: Tolerances = DEFAULT

    def __post_init__(self):
        H = np.asarray(self.H_S, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValidationError("H_S must be a square matrix", "system.H_S")
        if not lv.is_hermitian(H, 1e-10 * max(1.0, float(np.max(np.abs(H), initial=0.0)))):
            raise ValidationError("H_S must be Hermitian", "system.H_S")
        object.__setattr__(self, "H_S", lv.hermitian_part(H))

    @property
    def dim(self) -> int:
        return self.H_S.shape[0]

    @cached_property
    def eigen(self):
        """(energies, projections) with degenerate levels merged."""
        return lv.eigenprojections(self.H_S, self.tol)

    @cached_property
    def _components(self):
        energies, projs = self.eigen
        return lv.bohr_components(energies, projs, self.tol)

    @cached_property
    def bohr(self) -> np.ndarray:
        """Sorted Bohr frequencies ``mu - nu``."""
        return np.array(sorted(c.omega for c in self._components))


def gibbs_state(H_S: np.ndarray, beta: float) -> np.ndarray:
    if not beta > 0:
        raise ValidationError(f"inverse temperature must be positive, got {beta}")
    w, U = np.linalg.eigh(lv.hermitian_part(np.asarray(H_S, dtype=complex)))
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    return (U * p) @ U.conj().T


def jump_operators(Q: np.ndarray, system: SystemSpec) -> dict:
    """``{omega: V(omega)}`` with ``V(omega) = sum_{mu - nu = omega} P_nu Q P_mu``.

    ``V(omega)`` lowers the energy by ``omega``. Every Bohr frequency is a key,
    zero blocks included.
    """
    Q = np.asarray(Q, dtype=complex)
    _, projs = system.eigen
    out = {}
    for c in system._components:
        # component c collects P_l X P_r with E_l - E_r = c.omega, i.e. omega = -c.omega
        omega = -c.omega if c.omega != 0.0 else 0.0
        out[omega] = sum(projs[l] @ Q @ projs[r] for l, r in c.pairs)
    return dict(sorted(out.items()))


def _check_psd(h: np.ndarray, where: str, tol: Tolerances) -> np.ndarray:
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    if h.shape[0] != h.shape[1]:
        raise ValidationError("spectral matrix must be square", where)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if not lv.is_hermitian(h, tol.herm * scale * 10):
        raise ValidationError("spectral matrix is not Hermitian", where)
    w = np.linalg.eigvalsh(lv.hermitian_part(h))
    if w[0] < -tol.psd * scale:
        raise ValidationError(f"spectral matrix is not positive semidefinite "
                              f"(min eigenvalue {w[0]:.3e})", where)
    return lv.hermitian_part(h)


def kms_complete(h_pos: Mapping[float, np.ndarray], beta: float,
                 tol: Tolerances = DEFAULT) -> dict:
    """Extend ``{omega >= 0: h(omega)}`` to negative frequencies by the KMS relation.

    ``h(-omega) = exp(-beta omega) h(omega)^T``. The ``omega = 0`` entry must
    equal its own transpose, i.e. be real symmetric.
    """
    if not beta > 0:
        raise ValidationError(f"inverse temperature must be positive, got {beta}", "beta")
    full = {}
    for omega, h in h_pos.items():
        omega = float(omega)
        if omega < -_freq_tol(omega):
            raise ValidationError("h must be given on omega >= 0 only", f"h[{omega:g}]")
        h = _check_psd(h, f"h[{omega:g}]", tol)
        if abs(omega) <= _freq_tol(omega):
            if np.max(np.abs(h - h.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(h))):
                raise ValidationError("h(0) must be real symmetric (KMS at zero frequency)",
                                      "h[0]")
            full[0.0] = h
        else:
            full[omega] = h
            full[-omega] = np.exp(-beta * omega) * h.T
    return dict(sorted(full.items()))


@dataclass(frozen=True, eq=False)
class ReservoirSpec:
    """One thermal reservoir.

    ``h`` is either a table ``{omega >= 0: n x n matrix}`` or a float ``gamma``
    meaning the flat form ``h(omega) = gamma * 1``. ``s`` is an optional table
    ``{omega: n x n Hermitian}`` (missing frequencies are zero).
    """

    beta: float
    couplings: tuple
    h: Mapping[float, np.ndarray] | float = 1.0
    s: Mapping[float, np.ndarray] | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValidationError(f"inverse temperature must be positive, got {self.beta}", "beta")
        Qs = tuple(np.asarray(Q, dtype=complex) for Q in self.couplings)
        for k, Q in enumerate(Qs):
            if not lv.is_hermitian(Q, 1e-10 * max(1.0, float(np.max(np.abs(Q), initial=0.0)))):
                raise ValidationError("coupling operator must be Hermitian", f"couplings[{k}]")
        object.__setattr__(self, "couplings", Qs)

    @property
    def n(self) -> int:
        return len(self.couplings)

    def h_positive(self, omega: float, tol: Tolerances = DEFAULT) -> np.ndarray:
        if isinstance(self.h, (int, float)):
            return float(self.h) * np.eye(self.n, dtype=complex)
        val = _lookup(self.h, omega)
        if val is None:
            raise ValidationError(f"no spectral matrix for Bohr frequency {omega:.12g}", "h")
        return np.atleast_2d(np.asarray(val, dtype=complex))

    def s_at(self, omega: float) -> np.ndarray:
        if self.s is None:
            return np.zeros((self.n, self.n), dtype=complex)
        val = _lookup(self.s, omega)
        if val is None:
            return np.zeros((self.n, self.n), dtype=complex)
        return np.atleast_2d(np.asarray(val, dtype=complex))

    def with_beta(self, beta: float) -> "ReservoirSpec":
        return replace(self, beta=float(beta))


@dataclass(frozen=True, eq=False)
class DaviesSub(SubLindbladian):
    """Sub-Lindbladian of one reservoir, with its Kraus family grouped by Bohr frequency."""

    beta: float = 1.0
    kraus_by_bohr: Mapping[float, tuple] = field(default_factory=dict)


def build_sub(system: SystemSpec, res: ReservoirSpec, tol: Tolerances = DEFAULT) -> DaviesSub:
    d = system.dim
    if not res.couplings:
        raise ValidationError("a reservoir needs at least one coupling operator", "couplings")
    Vs = [jump_operators(Q, system) for Q in res.couplings]
    omegas = list(Vs[0].keys())
    needed = sorted({abs(w) if w != 0 else 0.0 for w in omegas})
    h_pos = {w: res.h_positive(w, tol) for w in needed}
    for w, h in h_pos.items():
        if h.shape != (res.n, res.n):
            raise ValidationError(f"spectral matrix must be {res.n}x{res.n}", f"h[{w:g}]")
    h_full = kms_complete(h_pos, res.beta, tol)

    T = np.zeros((d, d), dtype=complex)
    kraus_by_bohr = {}
    for w in omegas:
        V = [Vk[w] for Vk in Vs]
        s = res.s_at(w)
        if s.shape != (res.n, res.n):
            raise ValidationError(f"Lamb-shift matrix must be {res.n}x{res.n}", f"s[{w:g}]")
        for k in range(res.n):
            for l in range(res.n):
                if s[k, l] != 0:
                    T += s[k, l] * V[k].conj().T @ V[l]
        h = _lookup(h_full, w)
        g, U = np.linalg.eigh(h)
        ops = []
        for k in range(res.n):
            if g[k] <= 0:
                continue
            W = np.sqrt(g[k]) * sum(np.conj(U[l, k]) * V[l] for l in range(res.n))
            if np.linalg.norm(W) > tol.prune:
                ops.append(W)
        if ops:
            kraus_by_bohr[w] = tuple(ops)

    all_ops = [W for ops in kraus_by_bohr.values() for W in ops]
    if not all_ops:
        all_ops = [np.zeros((d, d), dtype=complex)]
    lind = lindblad_generator(lv.hermitian_part(T), KrausMap(tuple(all_ops)), tol)
    rho = gibbs_state(system.H_S, res.beta)
    parts = {}
    for w, ops in kraus_by_bohr.items():
        q = res.beta * w
        parts[q] = KrausMap(ops)
    sub = DaviesSub(rho, lind, dict(sorted(parts.items())), beta=res.beta,
                    kraus_by_bohr=dict(sorted(kraus_by_bohr.items())))
    report = detailed_balance_check(rho, lind, tol)
    if not report.passed:
        raise HypothesisError(f"built sub-Lindbladian fails detailed balance: {report.details}")
    return sub


def spohn_condition(Qs: Sequence[np.ndarray], H_S: np.ndarray,
                    tol: Tolerances = DEFAULT) -> PropertyReport:
    """Dimension of the joint commutant ``{Q}' cap {H_S}'`` (passes iff it is 1)."""
    H = np.asarray(H_S, dtype=complex)
    blocks = [lv.commutator(np.asarray(Q, dtype=complex)) for Q in Qs] + [lv.commutator(H)]
    A = np.vstack(blocks)
    sv = np.linalg.svd(A, compute_uv=False)
    scale = max(1.0, float(sv[0]) if sv.size else 1.0)
    dim = int(np.sum(sv <= 1e-10 * scale)) + max(0, A.shape[1] - sv.size)
    return PropertyReport("spohn_condition", dim == 1, float(dim - 1),
                          f"joint commutant has dimension {dim}")


def _all_real(system: SystemSpec, reservoirs: Sequence[ReservoirSpec]) -> bool:
    mats = [system.H_S]
    for r in reservoirs:
        mats += list(r.couplings)
        if not isinstance(r.h, (int, float)):
            mats += [np.asarray(v) for v in r.h.values()]
        if r.s is not None:
            mats += [np.asarray(v) for v in r.s.values()]
    return all(np.max(np.abs(np.imag(m)), initial=0.0) == 0 for m in mats)


@dataclass(frozen=True, eq=False)
class WeakCouplingModel:
    system: SystemSpec
    reservoirs: tuple
    subs: tuple
    total: Lindbladian
    flags: Mapping[str, bool]
    reports: tuple = ()
    tol: Tolerances = DEFAULT

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def M(self) -> int:
        return len(self.subs)

    @property
    def betas(self) -> np.ndarray:
        return np.array([r.beta for r in self.reservoirs], dtype=float)

    @property
    def H_S(self) -> np.ndarray:
        return self.system.H_S

    def with_betas(self, betas) -> "WeakCouplingModel":
        """Rebuild with new temperatures, re-completing the same positive-frequency data."""
        return assemble(self.system, [r.with_beta(b) for r, b in zip(self.reservoirs, betas)],
                        tol=self.tol)


def assemble(system: SystemSpec, reservoirs: Sequence[ReservoirSpec],
             tol: Tolerances = DEFAULT, seed: int = 0) -> WeakCouplingModel:
    if not reservoirs:
        raise ValidationError("at least one reservoir is required", "reservoirs")
    for j, r in enumerate(reservoirs):
        for k, Q in enumerate(r.couplings):
            if Q.shape != (system.dim, system.dim):
                raise ValidationError("coupling dimension does not match H_S",
                                      f"reservoirs[{j}].couplings[{k}]")
    subs = tuple(build_sub(system, r, tol) for r in reservoirs)
    total = subs[0].lind
    for s in subs[1:]:
        total = total + s.lind
    er = positivity_improving_check(total, seed=seed, tol=tol)
    theta = TimeReversal.conjugation(system.dim)
    tri_reports = [time_reversal_check(theta, s.rho_ref, s.lind, tol) for s in subs]
    tri = all(r.passed for r in tri_reports)
    flags = {"er": bool(er.passed), "tri": bool(tri), "kms": True,
             "real_inputs": _all_real(system, reservoirs)}
    return WeakCouplingModel(system, tuple(reservoirs), subs, total, flags,
                             reports=(er, *tri_reports), tol=tol)
