"""Quantum-jump unraveling of the entropic full counting statistics."""
from .channels import ChannelSet, JumpChannel, build_channels, covariance_residual
from .ensemble import (
    EnsembleStats,
    Event,
    Trajectory,
    empirical_clt_check,
    entropy_rates,
    sample_ensemble,
    sample_trajectory,
)

__all__ = [
    "ChannelSet", "JumpChannel", "build_channels", "covariance_residual", "EnsembleStats", "Event",
    "Trajectory", "empirical_clt_check", "entropy_rates", "sample_ensemble", "sample_trajectory",
]
