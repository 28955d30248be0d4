"""Counter-based uniforms: ``u = mix(key(seed, trajectory) + counter * GAMMA)``.

Every trajectory owns an independent stream addressed by its index, so the
result does not depend on how trajectories are split across workers.
"""
from __future__ import annotations

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
SEED_SALT = np.uint64(0xD1B54A32D192ED03)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


mix_jit = njit(cache=True)(_mix)


def stream_keys(seed: int, index) -> np.ndarray:
    """Per-trajectory keys (vectorized over ``index``)."""
    with np.errstate(over="ignore"):
        idx = np.asarray(index, dtype=np.uint64)
        s = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * SEED_SALT + GAMMA)
        return _mix(s ^ (idx * GAMMA + np.uint64(1)))


def uniforms(keys: np.ndarray, counter) -> np.ndarray:
    """Uniform doubles in ``[0, 1)`` for each key at the given counter(s)."""
    with np.errstate(over="ignore"):
        z = _mix(np.asarray(keys, dtype=np.uint64) + np.asarray(counter, dtype=np.uint64) * GAMMA)
        return (z >> S11).astype(np.float64) * INV53


@njit(cache=True)
def uniform_jit(key, counter):
    z = mix_jit(key + np.uint64(counter) * GAMMA)
    return np.float64(z >> S11) * INV53


class RngStream:
    """The stream of one trajectory; ``next()`` advances the counter."""

    def __init__(self, seed: int, index: int = 0):
        self.key = stream_keys(seed, np.array([index]))[0]
        self.counter = 0

    def next(self) -> float:
        u = float(uniforms(np.array([self.key]), self.counter)[0])
        self.counter += 1
        return u
