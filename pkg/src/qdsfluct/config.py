"""Numerical tolerances shared by every module.

All defaults can be overridden per call (``tol=Tolerances(...)``) or from the
command line (``--tol name=value``).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-12
    trace: float = 1e-12
    psd: float = 1e-10
    eig: float = 1e-9
    exp: float = 1e-10
    faithful: float = 1e-12
    # relative to the spectral diameter
    bohr: float = 1e-9
    # generic residual gate for structural checks (detailed balance, TRI, ...)
    check: float = 1e-9
    rank: float = 1e-10
    prune: float = 1e-14

    def replace(self, **changes: float) -> "Tolerances":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in changes.items()})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()
