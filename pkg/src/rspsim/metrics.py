"""Fidelity between density matrices and closed-form RSP fidelities.

Fidelity is the root form F = Tr sqrt(sqrt(rho) sigma sqrt(rho)), so F = 1
for identical states and F = |<psi|phi>| for pure ones.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import qcore
from .errors import DimensionError, DomainError, NumericError

RADICAND_TOL = 1e-12


class DephasingFidelityTerms(NamedTuple):
    alpha: float
    beta: float
    gamma: float


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity in root form.

    Args:
        rho: density matrix.
        sigma: density matrix of the same dimension.

    Returns:
        float: Tr sqrt(sqrt(rho) sigma sqrt(rho)).
    """
    a, b = qcore.as_matrix(rho), qcore.as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"fidelity of {a.shape} and {b.shape} matrices")
    root = qcore.sqrt_psd(a)
    inner = qcore.hermitize(root @ b @ root)
    w, _ = qcore.herm_eig(inner)
    return float(np.sum(np.sqrt(qcore.clean_spectrum(w))))


def fidelity_qubit(rho, sigma) -> float:
    """Qubit-only closed form sqrt(Tr(rho sigma) + 2 sqrt(det rho det sigma))."""
    a, b = qcore.as_matrix(rho), qcore.as_matrix(sigma)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError("fidelity_qubit needs two 2x2 matrices")
    dets = max(float(np.real(np.linalg.det(a) * np.linalg.det(b))), 0.0)
    return math.sqrt(max(float(np.real(qcore.expectation(a, b))) + 2 * math.sqrt(dets), 0.0))


def _check_unit(name: str, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name}={x} outside [0, 1]")
    return float(x)


def fidelity_depolarizing_closed(r: float, p: float) -> float:
    """Fidelity reached through the Werner-state channel; independent of direction."""
    r, p = _check_unit("r", r), _check_unit("p", p)
    return 0.5 * (math.sqrt((1 + r) * (1 + p * r)) + math.sqrt((1 - r) * (1 - p * r)))


def dephasing_terms(r: float, theta: float, p: float) -> DephasingFidelityTerms:
    r, p = _check_unit("r", r), _check_unit("p", p)
    c2 = math.cos(2 * theta)
    alpha = ((1 + p) * (1 + r) ** 2 + (1 - p) * (1 + r) * (1 + r * c2)) / 8
    beta = ((1 + p) * (1 - r) ** 2 + (1 - p) * (1 - r) * (1 - r * c2)) / 8
    gamma = r * (1 - p) * math.sqrt(max(1 - r * r, 0.0)) * math.sin(2 * theta) / 8
    return DephasingFidelityTerms(alpha, beta, gamma)


def _sqrt_clamped(x: float) -> float:
    if x < -RADICAND_TOL:
        raise NumericError(f"negative radicand {x:.3e}")
    return math.sqrt(max(x, 0.0))


def fidelity_dephasing_closed(r: float, theta: float, p: float) -> float:
    """Fidelity reached through the dephased singlet; depends on theta, not phi.

    alpha, beta, gamma are the entries of a real symmetric 2x2 matrix whose
    eigenvalue square roots sum to the fidelity.
    """
    if not 0.0 <= theta <= math.pi + 1e-12:
        raise DomainError(f"theta={theta} outside [0, pi]")
    alpha, beta, gamma = dephasing_terms(r, theta, p)
    mean = (alpha + beta) / 2
    spread = math.sqrt(((alpha - beta) / 2) ** 2 + gamma**2)
    return _sqrt_clamped(mean + spread) + _sqrt_clamped(mean - spread)
