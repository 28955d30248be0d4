"""Jump channels of the unraveling: one Kraus operator per (reservoir, entropy quantum)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import liouville as lv
from ..davies import WeakCouplingModel
from ..errors import NumericalError
from ..fcs import no_jump_operator

COND_LIMIT = 1e8


@dataclass(frozen=True, eq=False)
class JumpChannel:
    reservoir: int
    quantum: float  # entropy quantum beta_j * omega
    op: np.ndarray


@dataclass(frozen=True, eq=False)
class ChannelSet:
    channels: tuple
    K: np.ndarray
    n_reservoirs: int

    @property
    def ops(self) -> np.ndarray:
        d = self.K.shape[0]
        if not self.channels:
            return np.zeros((0, d, d), dtype=complex)
        return np.stack([c.op for c in self.channels]).astype(complex)

    @property
    def reservoirs(self) -> np.ndarray:
        return np.array([c.reservoir for c in self.channels], dtype=np.int64)

    @property
    def quanta(self) -> np.ndarray:
        return np.array([c.quantum for c in self.channels], dtype=float)

    def completeness_residual(self, model: WeakCouplingModel) -> float:
        d = self.K.shape[0]
        total = sum((c.op.conj().T @ c.op for c in self.channels), np.zeros((d, d), dtype=complex))
        ref = sum(s.lind.phi_one for s in model.subs)
        return float(np.max(np.abs(total - ref)))

    def total_rate_bound(self) -> float:
        """``|sum_c W_c^dagger W_c|``: an upper bound on the jump intensity."""
        d = self.K.shape[0]
        total = sum((c.op.conj().T @ c.op for c in self.channels), np.zeros((d, d), dtype=complex))
        return float(np.linalg.norm(total, 2))


def build_channels(model: WeakCouplingModel) -> ChannelSet:
    chans = []
    for j, sub in enumerate(model.subs):
        for q, part in sub.modular_parts.items():
            for W in part.kraus_ops:
                if np.linalg.norm(W) > 0:
                    chans.append(JumpChannel(j, float(q), np.asarray(W, dtype=complex)))
    return ChannelSet(tuple(chans), no_jump_operator(model), model.M)


def covariance_residual(channel: JumpChannel, S: np.ndarray, a: float) -> float:
    """``|e^{aS} W e^{-aS} - e^{-a w} W|`` for the reservoir's entropy observable ``S``."""
    E = lv.herm_func(S, lambda x: np.exp(a * x))
    Einv = lv.herm_func(S, lambda x: np.exp(-a * x))
    return float(np.max(np.abs(E @ channel.op @ Einv - np.exp(-a * channel.quantum) * channel.op)))


@dataclass(frozen=True, eq=False)
class NoJumpPropagator:
    """``e^{-sK} = V diag(e^{-s lam}) V^{-1}`` from one eigendecomposition of ``K``."""

    lam: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray

    @classmethod
    def from_K(cls, K: np.ndarray) -> "NoJumpPropagator":
        lam, V = np.linalg.eig(K)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise NumericalError(f"no-jump operator is too close to defective (cond {cond:.2e})")
        return cls(lam.astype(complex), V.astype(complex), np.linalg.inv(V).astype(complex))

    def apply(self, s: float, psi: np.ndarray) -> np.ndarray:
        return self.V @ (np.exp(-s * self.lam) * (self.Vinv @ psi))
