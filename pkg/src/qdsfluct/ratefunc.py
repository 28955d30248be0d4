"""Grid scans of ``e(alpha)`` and the Legendre transform ``I(s) = -inf_a (a.s + e(a))``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .davies import WeakCouplingModel
from .fcs import cgf_grad, cgf_gradient0, cgf_hessian0, cgf_point
from .parallel import ordered_map
from .symmetry import box_grid

NEWTON_GTOL = 1e-10
NEWTON_MAXIT = 100
HESS_GRAD_STEP = 1e-5


class ScanBoxError(ValueError):
    """The minimizer of the Legendre objective is not inside the scanned box."""


@dataclass(eq=False)
class CGFScan:
    model: WeakCouplingModel
    box: list
    grid: np.ndarray
    values: np.ndarray
    gaps: np.ndarray
    gradient0: np.ndarray | None = None
    hessian0: np.ndarray | None = None

    @property
    def mean_rates(self) -> np.ndarray:
        """``varsigma_bar = -grad e(0)``."""
        return -self.gradient0


def cgf_scan(model: WeakCouplingModel, box, resolution: int = 21, derivatives: bool = True,
             tol: Tolerances = DEFAULT) -> CGFScan:
    box = [tuple(map(float, ab)) for ab in box]
    if len(box) != model.M:
        raise ValueError(f"box has {len(box)} axes, model has {model.M} reservoirs")
    grid = box_grid(box, resolution)
    pts = ordered_map(lambda a: cgf_point(model, a, tol), grid)
    vals = np.array([p.value.real for p in pts])
    gaps = np.array([p.gap for p in pts])
    g = h = None
    if derivatives:
        g = cgf_gradient0(model, tol=tol).value
        h = cgf_hessian0(model, tol=tol).value
    return CGFScan(model, box, grid, vals, gaps, g, h)


@dataclass
class LegendreResult:
    value: float  # I(s); math.inf when the infimum diverges
    alpha: np.ndarray  # last iterate (argmin when finite)
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _hessian(model, a, tol) -> np.ndarray:
    M = model.M
    H = np.empty((M, M))
    for k in range(M):
        e = np.zeros(M)
        e[k] = HESS_GRAD_STEP
        H[:, k] = (cgf_grad(model, a + e, tol)[1] - cgf_grad(model, a - e, tol)[1]) / (2 * HESS_GRAD_STEP)
    return 0.5 * (H + H.T)


def _unbounded_direction(model, s) -> float | None:
    """Slope of the objective along the flat direction ``beta^{-1}`` of a KMS model."""
    if not model.flags.get("kms", False):
        return None
    u = 1.0 / model.betas
    return float(np.dot(u, s) / (np.linalg.norm(u) * max(1.0, np.linalg.norm(s))))


def legendre(scan: CGFScan, s, tol: Tolerances = DEFAULT, gtol: float = NEWTON_GTOL) -> LegendreResult:
    model = scan.model
    s = np.asarray(s, dtype=float)
    lo = np.array([b[0] for b in scan.box])
    hi = np.array([b[1] for b in scan.box])
    obj_grid = scan.grid @ s + scan.values
    i0 = int(np.argmin(obj_grid))
    diag = {"grid_argmin": scan.grid[i0].tolist(), "grid_min": float(obj_grid[i0])}

    slope = _unbounded_direction(model, s)
    if slope is not None:
        diag["flat_direction_slope"] = slope
        if abs(slope) > 1e-8:
            diag["reason"] = "objective is affine and non-constant along beta^{-1}"
            return LegendreResult(math.inf, scan.grid[i0], True, diag)

    def f(a):
        e, g = cgf_grad(model, a, tol)
        return float(a @ s + e), s + g

    centre = 0.5 * (lo + hi)
    if slope is not None:
        # the objective is constant along beta^{-1}; pick the representative nearest the box centre
        u = 1.0 / model.betas

        def recentre(a):
            return a - (np.dot(a - centre, u) / np.dot(u, u)) * u
    else:
        def recentre(a):
            return a

    a = scan.grid[i0].copy()
    fa, ga = f(a)
    converged = False
    it = 0
    for it in range(NEWTON_MAXIT):
        if np.linalg.norm(ga) <= gtol:
            converged = True
            break
        H = _hessian(model, a, tol)
        step = -np.linalg.pinv(H, rcond=1e-8, hermitian=True) @ ga
        if ga @ step >= 0:  # not a descent direction; fall back to gradient
            step = -ga
        t = 1.0
        while t > 1e-12:
            trial = a + t * step
            ft, gt = f(trial)
            if ft <= fa + 1e-4 * t * (ga @ step) or abs(ft - fa) <= 1e-15 * max(1.0, abs(fa)):
                break
            t *= 0.5
        a, fa, ga = recentre(trial), ft, gt
    diag.update(iterations=it, grad_norm=float(np.linalg.norm(ga)))
    outside = bool(np.any(a < lo - 1e-12) | np.any(a > hi + 1e-12))
    if not converged or outside:
        edge = bool(np.any(np.isclose(scan.grid[i0], lo)) or np.any(np.isclose(scan.grid[i0], hi)))
        diag["outside_box"] = outside
        if edge and np.linalg.norm(ga) > 1e-3 and fa < diag["grid_min"]:
            diag["reason"] = "objective keeps decreasing past the box boundary"
            return LegendreResult(math.inf, a, False, diag)
        raise ScanBoxError(f"minimizer not located inside the scan box: {diag}")
    return LegendreResult(-fa, a, True, diag)


def rate_function(scan: CGFScan, s, tol: Tolerances = DEFAULT) -> float:
    """``I(s)``; ``math.inf`` when the infimum diverges."""
    return legendre(scan, s, tol).value
