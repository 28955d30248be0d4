"""Bundled model files.

``qubit2r``: two-level system between two reservoirs at different temperatures.
``qubit2r_equilibrium``: the same at a common temperature.
``qutrit_generic``: three levels, non-commuting couplings, a 2x2 spectral matrix and a Lamb shift.
``reducible``: three levels whose couplings leave a two-dimensional commutant (not ergodic).
"""
from __future__ import annotations

from importlib import resources

NAMES = ("qubit2r", "qubit2r_equilibrium", "qutrit_generic", "reducible")


def path(name: str):
    if name not in NAMES:
        raise KeyError(f"unknown corpus model {name!r}; expected one of {NAMES}")
    return resources.files(__name__) / f"{name}.json"


def load(name: str, tol=None):
    from ..config import DEFAULT
    from ..io import load_model

    return load_model(path(name), tol or DEFAULT)
