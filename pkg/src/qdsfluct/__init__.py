"""Full counting statistics of entropy flows for Davies-type quantum dynamical semigroups."""
from .config import DEFAULT, Tolerances
from .davies import ReservoirSpec, SystemSpec, WeakCouplingModel, assemble, gibbs_state
from .errors import (
    DegenerateEigenvalueError,
    DimensionError,
    HypothesisError,
    NotFaithfulError,
    NumericalError,
    QdsError,
    ValidationError,
)
from .fcs import cgf, deform, drazin_apply, entropy_production, fluxes, steady_state

__version__ = "0.1.0"

__all__ = [
    "DEFAULT", "Tolerances", "ReservoirSpec", "SystemSpec", "WeakCouplingModel", "assemble",
    "gibbs_state", "DegenerateEigenvalueError", "DimensionError", "HypothesisError",
    "NotFaithfulError", "NumericalError", "QdsError", "ValidationError", "cgf", "deform",
    "drazin_apply", "entropy_production", "fluxes", "steady_state",
]
