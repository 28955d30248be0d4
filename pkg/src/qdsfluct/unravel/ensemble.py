"""Trajectories, ensembles and their estimators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..davies import WeakCouplingModel
from ..errors import NumericalError
from ..lindblad import PropertyReport
from ..parallel import thread_cap
from . import kernels
from .channels import ChannelSet, NoJumpPropagator, build_channels

BOOTSTRAP = 200
CLT_MIN_SAMPLES = 10_000


@dataclass(frozen=True)
class Event:
    reservoir: int
    quantum: float
    time: float


@dataclass(frozen=True)
class Trajectory:
    horizon: float
    events: tuple
    n_reservoirs: int


def entropy_rates(traj: Trajectory) -> np.ndarray:
    """``varsigma_j = (1/t) sum of the quanta exchanged with reservoir j``."""
    out = np.zeros(traj.n_reservoirs)
    for ev in traj.events:
        out[ev.reservoir] += ev.quantum
    return out / traj.horizon


def _initial_ensemble(rho: np.ndarray):
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    keep = w > 0
    vecs = U[:, keep].T.astype(complex)
    cum = np.cumsum(w[keep])
    cum[-1] = 1.0
    return vecs, cum


def _check_status(status, counts, first):
    bad = np.flatnonzero(status)
    if bad.size:
        i = int(bad[0])
        what = "event cap reached" if status[i] == kernels.CAPPED else "norm underflow at a jump"
        raise NumericalError(f"trajectory {first + i}: {what} after {int(counts[i])} events")


def _backend(backend):
    if backend is None:
        return "numpy" if kernels.disabled() else "numba"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def _set_threads():
    import numba

    numba.set_num_threads(max(1, min(thread_cap(), numba.config.NUMBA_NUM_THREADS)))


def sample_trajectory(channels: ChannelSet, psi0: np.ndarray, t: float, seed: int,
                      index: int = 0, max_events: int = kernels.MAX_EVENTS) -> Trajectory:
    """One trajectory from the pure state ``psi0`` on stream ``(seed, index)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial vector must be normalized")
    prop = NoJumpPropagator.from_K(channels.K)
    keys = kernels.keys_for(seed, index, 1)
    _, counts, status, events = kernels.run_numpy(prop, channels, psi0[None, :], np.array([1.0]), t,
                                                  keys, max_events, record=True)
    _check_status(status, counts, index)
    evs = np.vstack(events) if events else np.zeros((0, 4))
    return Trajectory(float(t), tuple(Event(int(r[1]), float(r[2]), float(r[3])) for r in evs),
                      channels.n_reservoirs)


@dataclass(eq=False)
class EnsembleStats:
    t: float
    seed: int
    samples: np.ndarray  # (N, M) entropy-rate vectors
    counts: np.ndarray
    backend: str
    extra: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def laplace_values(self, alpha) -> np.ndarray:
        return np.exp(-self.t * (self.samples @ np.asarray(alpha, dtype=float)))

    def bootstrap(self, stat, B: int = BOOTSTRAP, seed: int | None = None):
        """``(estimate, standard error, (2.5%, 97.5%) percentile interval)`` of ``stat(samples)``."""
        rng = np.random.default_rng(self.seed if seed is None else seed)
        est = np.asarray(stat(self.samples))
        reps = np.array([stat(self.samples[rng.integers(0, self.N, self.N)]) for _ in range(B)])
        se = reps.std(axis=0, ddof=1) if B > 1 else np.zeros_like(est)
        lo, hi = np.percentile(reps, [2.5, 97.5], axis=0)
        return est, se, (lo, hi)

    def laplace(self, alpha, B: int = BOOTSTRAP):
        a = np.asarray(alpha, dtype=float)
        return self.bootstrap(lambda x: np.exp(-self.t * (x @ a)).mean(), B)

    def mean_with_error(self, B: int = BOOTSTRAP):
        return self.bootstrap(lambda x: x.mean(axis=0), B)

    def scaled_covariance(self, samples=None) -> np.ndarray:
        x = self.samples if samples is None else samples
        return self.t * np.cov(x, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])


def sample_ensemble(model: WeakCouplingModel, rho: np.ndarray, t: float, N: int, seed: int,
                    backend: str | None = None, first: int = 0,
                    max_events: int = kernels.MAX_EVENTS) -> EnsembleStats:
    """``N`` trajectories on ``[0, t]`` with initial vectors drawn from the eigenbasis of ``rho``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if not t > 0:
        raise ValueError("t must be positive")
    backend = _backend(backend)
    chans = build_channels(model)
    prop = NoJumpPropagator.from_K(chans.K)
    vecs, cum = _initial_ensemble(np.asarray(rho, dtype=complex))
    keys = kernels.keys_for(seed, first, N)
    if backend == "numba":
        _set_threads()
        rates, counts, status = kernels.run_numba(prop, chans, vecs, cum, t, keys, max_events)
    else:
        rates, counts, status, _ = kernels.run_numpy(prop, chans, vecs, cum, t, keys, max_events)
    _check_status(status, counts, first)
    return EnsembleStats(float(t), int(seed), rates, counts, backend)


def empirical_clt_check(stats: EnsembleStats, D: np.ndarray, n_se: float = 5.0,
                        B: int = BOOTSTRAP) -> PropertyReport:
    """Compare ``t * Cov(varsigma)`` with ``D`` entrywise in bootstrap standard errors.

    ``passed`` is ``None`` (inconclusive) below ``CLT_MIN_SAMPLES`` samples.
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if stats.N < CLT_MIN_SAMPLES:
        return PropertyReport("clt_covariance", None, float("nan"),
                              f"inconclusive: {stats.N} samples (< {CLT_MIN_SAMPLES})")
    est, se, _ = stats.bootstrap(stats.scaled_covariance, B)
    z = np.abs(est - D) / np.maximum(se, 1e-300)
    return PropertyReport("clt_covariance", bool(np.all(z <= n_se)), float(z.max()),
                          {"covariance": est.tolist(), "D": D.tolist(), "se": se.tolist(),
                           "max_z": float(z.max())})
