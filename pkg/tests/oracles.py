"""Closed-form references for the two-level, two-reservoir model.

These are written from the classical rate equations for the populations of
``H = diag(0, eps)`` with ``Q_j = sigma_x`` and flat spectral densities
``gamma_j``; no Liouville-space code is involved.

Reservoir j moves the system down at rate ``a_j = gamma_j`` (entropy quantum
``+beta_j eps`` dumped into the reservoir) and up at rate
``b_j = exp(-beta_j eps) gamma_j`` (quantum ``-beta_j eps``).
"""
import math

import numpy as np


def rates(betas, gammas, eps=1.0):
    a = [g for g in gammas]
    b = [math.exp(-bj * eps) * g for bj, g in zip(betas, gammas)]
    return a, b


def tilted_block(alpha, betas, gammas, eps=1.0):
    """Tilted rate matrix on (ground, excited) populations, Heisenberg orientation."""
    a, b = rates(betas, gammas, eps)
    A, B = sum(a), sum(b)
    C = sum(aj * math.exp(-al * bj * eps) for aj, al, bj in zip(a, alpha, betas))
    D = sum(bj_ * math.exp(al * bj * eps) for bj_, al, bj in zip(b, alpha, betas))
    # rows: from ground (goes up with b), from excited (goes down with a)
    return np.array([[-B, D], [C, -A]])


def cgf(alpha, betas, gammas, eps=1.0):
    """Largest root of the 2x2 tilted block: x = (-(A+B) + sqrt((A-B)^2 + 4CD)) / 2."""
    a, b = rates(betas, gammas, eps)
    A, B = sum(a), sum(b)
    C = sum(aj * math.exp(-al * bj * eps) for aj, al, bj in zip(a, alpha, betas))
    D = sum(bj_ * math.exp(al * bj * eps) for bj_, al, bj in zip(b, alpha, betas))
    return 0.5 * (-(A + B) + math.sqrt((A - B) ** 2 + 4 * C * D))


def excited_weight(betas, gammas, eps=1.0):
    a, b = rates(betas, gammas, eps)
    return sum(b) / (sum(a) + sum(b))


def energy_fluxes(betas, gammas, eps=1.0):
    """Steady energy flux out of each reservoir into the system."""
    a, b = rates(betas, gammas, eps)
    pe = excited_weight(betas, gammas, eps)
    pg = 1 - pe
    return np.array([eps * (pg * bj - pe * aj) for aj, bj in zip(a, b)])


def laplace(alpha, t, betas, gammas, p0, eps=1.0):
    """``sum_x p0(x) [exp(t G_alpha) 1](x)`` with the tilted block ``G_alpha``."""
    from scipy.linalg import expm

    G = tilted_block(alpha, betas, gammas, eps)
    return float(np.asarray(p0) @ expm(t * G) @ np.ones(2))
