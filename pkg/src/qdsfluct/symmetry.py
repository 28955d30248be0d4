"""Fluctuation-symmetry residuals and regularity checks for ``e(alpha)``."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from numpy.polynomial import chebyshev
from scipy.optimize import linear_sum_assignment

from . import liouville as lv
from .config import DEFAULT, Tolerances
from .davies import WeakCouplingModel
from .errors import HypothesisError
from .fcs import cgf, deform, energetic_cgf
from .lindblad import choi_is_cp
from .parallel import ordered_map

SYMMETRY_THRESHOLD = 1e-8


@dataclass
class SymmetryReport:
    name: str
    residual: float
    threshold: float
    asserted: bool = True  # False when the hypothesis behind the symmetry fails
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool | None:
        if not self.asserted:
            return None
        return self.residual <= self.threshold

    def row(self) -> dict:
        p = self.passed
        return {"check": self.name, "residual": self.residual, "threshold": self.threshold,
                "status": "report-only" if p is None else ("pass" if p else "fail")}


def box_grid(box, resolution: int) -> np.ndarray:
    """Tensor grid of ``resolution`` points per axis; rows are alpha points."""
    axes = [np.linspace(a, b, resolution) for a, b in box]
    return np.array(list(product(*axes)), dtype=float)


def es_symmetry_residual(model: WeakCouplingModel, grid, tol: Tolerances = DEFAULT) -> SymmetryReport:
    """``max |e(1 - alpha) - e(alpha)|``; asserted only for time-reversal invariant models."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    one = np.ones(model.M)

    def diff(a):
        return abs(cgf(model, one - a, tol) - cgf(model, a, tol))

    res = max(ordered_map(diff, grid), default=0.0)
    return SymmetryReport("evans-searles", float(res), SYMMETRY_THRESHOLD,
                          asserted=bool(model.flags.get("tri", False)),
                          details={"points": len(grid)})


def spectrum_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Bottleneck distance between the eigenvalue multisets of ``A`` and ``B``."""
    a = np.linalg.eigvals(A)
    b = np.linalg.eigvals(B)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max(initial=0.0))


def translation_similarity(model: WeakCouplingModel, lam: float) -> np.ndarray:
    """Superoperator ``X -> X e^{-lam H_S}`` conjugating ``L_(alpha)`` to ``L_(alpha + lam/beta)``."""
    return lv.right(lv.herm_func(model.H_S, lambda x: np.exp(-lam * x)))


def translation_symmetry_residual(model: WeakCouplingModel, grid, lams=(-1.0, 0.5, 2.0),
                                  tol: Tolerances = DEFAULT, spectra: bool = True) -> SymmetryReport:
    """``max |e(alpha + lam/beta) - e(alpha)|`` plus the similarity and spectrum checks."""
    if not model.flags.get("kms", False):
        raise HypothesisError("translation symmetry needs KMS reference states")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    binv = 1.0 / model.betas
    sims = {lam: (translation_similarity(model, lam), translation_similarity(model, -lam)) for lam in lams}

    def point(a):
        e0 = cgf(model, a, tol)
        L0 = deform(model, a, check=False).matrix
        out = [0.0, 0.0, 0.0]
        for lam in lams:
            b = a + lam * binv
            out[0] = max(out[0], abs(cgf(model, b, tol) - e0))
            L1 = deform(model, b, check=False).matrix
            R, Rinv = sims[lam]
            conj = R @ L0 @ Rinv
            out[1] = max(out[1], float(np.max(np.abs(conj - L1))) / max(1.0, float(np.max(np.abs(L1)))))
            if spectra:
                out[2] = max(out[2], spectrum_distance(L0, L1))
        return out

    rows = np.array(ordered_map(point, grid))
    value, similarity, spectrum = rows.max(axis=0) if len(rows) else (0.0, 0.0, 0.0)
    residual = max(value, spectrum)
    return SymmetryReport("translation", float(residual), SYMMETRY_THRESHOLD,
                          details={"value": float(value), "similarity": float(similarity),
                                   "spectrum": float(spectrum), "lambdas": list(lams)})


def energetic_translation_residual(model, grid, lams=(-1.0, 0.5, 2.0), tol: Tolerances = DEFAULT):
    """``max |chi(alpha + lam 1) - chi(alpha)|``."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    one = np.ones(model.M)
    res = 0.0
    for a in grid:
        c0 = energetic_cgf(model, a, tol)
        for lam in lams:
            res = max(res, abs(energetic_cgf(model, a + lam * one, tol) - c0))
    return SymmetryReport("energetic-translation", float(res), SYMMETRY_THRESHOLD,
                          asserted=bool(model.flags.get("kms", False)))


def energetic_es_residual(model, grid, tol: Tolerances = DEFAULT):
    """``max |chi(-beta - alpha) - chi(alpha)|``."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    res = max((abs(energetic_cgf(model, -model.betas - a, tol) - energetic_cgf(model, a, tol))
               for a in grid), default=0.0)
    return SymmetryReport("energetic-evans-searles", float(res), SYMMETRY_THRESHOLD,
                          asserted=bool(model.flags.get("tri", False)))


def convexity_residual(model, a, b, n: int = 41, tol: Tolerances = DEFAULT) -> float:
    """Most negative second difference of ``e`` on the segment ``[a, b]`` (0 if convex)."""
    s = np.linspace(0.0, 1.0, n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    vals = np.array([cgf(model, a + t * (b - a), tol) for t in s])
    second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
    return float(max(0.0, -second.min(initial=0.0)))


def chebyshev_smoothness(model, a, b, degree: int = 8, probes: int = 33,
                         tol: Tolerances = DEFAULT) -> float:
    """Max error of the degree-``degree`` Chebyshev interpolant of ``e`` along ``[a, b]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def f(x):
        return np.array([cgf(model, a + 0.5 * (xi + 1) * (b - a), tol) for xi in np.atleast_1d(x)])

    coef = chebyshev.chebinterpolate(f, degree)
    x = np.linspace(-1, 1, probes)
    return float(np.max(np.abs(chebyshev.chebval(x, coef) - f(x))))


def deformed_cp_check(model, alpha, t: float = 1.0, tol: Tolerances = DEFAULT):
    """Choi test for ``e^{t L_(alpha)}``."""
    L = deform(model, alpha, check=False)
    return choi_is_cp(lv.semigroup(L.matrix, t), tol)
