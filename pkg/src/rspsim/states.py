"""Qubit state constructors: Bloch parameterization, basis kets, singlet, POVM."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import qcore
from .errors import DimensionError, DomainError

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

R_TOL = 1e-12


@dataclass(frozen=True)
class BlochVector:
    """Target-state coordinates ``(r, theta, phi)``.

    ``r`` may be negative, in which case the state lies along the antipodal
    direction; :meth:`canonical` makes that explicit.
    """

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if abs(self.r) > 1.0 + R_TOL:
            raise DomainError(f"Bloch radius |r|={abs(self.r)} exceeds 1")

    def canonical(self) -> "BlochVector":
        if self.r >= 0:
            return self
        return BlochVector(-self.r, math.pi - self.theta, (self.phi + math.pi) % (2 * math.pi))

    @property
    def cartesian(self) -> np.ndarray:
        st = math.sin(self.theta)
        return self.r * np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    @classmethod
    def from_rho(cls, rho) -> "BlochVector":
        """Recover canonical coordinates from a 2x2 density matrix."""
        x, y, z = (float(np.real(qcore.expectation(s, rho))) for s in PAULIS)
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            return cls(0.0, 0.0, 0.0)
        theta = math.acos(max(-1.0, min(1.0, z / r)))
        phi = math.atan2(y, x) % (2 * math.pi)
        return cls(min(r, 1.0), theta, phi)


class PovmPair(NamedTuple):
    pi0: np.ndarray
    pi1: np.ndarray


def bloch_to_rho(v: BlochVector) -> np.ndarray:
    """Density matrix (I + r.sigma) / 2."""
    x, y, z = v.canonical().cartesian
    return 0.5 * (I2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def pure_kets(theta: float, phi: float):
    """Return ``(psi, psi_perp, psi_p, psi_p_perp)``.

    ``psi = cos(t/2)|0> + e^{i phi} sin(t/2)|1>`` and ``psi_perp`` its
    orthogonal partner. The primed pair is the image of the unprimed pair
    under sigma_z, which is what the classically correlated part of the
    dephased singlet produces on Bob's side.

    The orthogonal partners carry ``e^{-i phi}`` on the ``|0>`` component;
    with ``e^{+i phi}`` they would not be orthogonal for generic ``phi``.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    psi = np.array([c, e * s], dtype=complex)
    psi_perp = np.array([np.conj(e) * s, -c], dtype=complex)
    psi_p = np.array([c, -e * s], dtype=complex)
    psi_p_perp = np.array([np.conj(e) * s, c], dtype=complex)
    return psi, psi_perp, psi_p, psi_p_perp


def projector(ket) -> np.ndarray:
    k = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(k, np.conj(k))


def psi_minus_ket() -> np.ndarray:
    return (np.kron(KET0, KET1) - np.kron(KET1, KET0)) / math.sqrt(2)


def bell_psi_minus() -> np.ndarray:
    """|Psi-><Psi-| on A (x) B, A the most significant factor."""
    return projector(psi_minus_ket())


def povm_elements(r: float) -> PovmPair:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"POVM strength r={r} outside [0, 1]")
    pi1 = np.diag([(1 - r) / 2, (1 + r) / 2]).astype(complex)
    return PovmPair(I2 - pi1, pi1)


def check_density(rho, tol: float = 1e-9) -> np.ndarray:
    """Validate and return ``rho`` as a density matrix (Hermitian, unit trace, PSD)."""
    a = qcore.as_matrix(rho)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"density matrix must be square, got {a.shape}")
    if not qcore.is_hermitian(a, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(a) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(a).real:.12g} != 1")
    w, _ = qcore.herm_eig(a)
    if w[0] < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return a


def is_density(rho, tol: float = 1e-9) -> bool:
    try:
        check_density(rho, tol)
    except (ValueError, DimensionError):
        return False
    return True


def _project_simplex(w: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {x >= 0, sum x = 1}
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    last = np.flatnonzero(u - (css - 1) / k > 0)[-1]
    shift = (css[last] - 1) / (last + 1)
    return np.maximum(w - shift, 0.0)


def nearest_density_matrix(m) -> np.ndarray:
    """Frobenius-nearest density matrix to the Hermitian part of ``m``."""
    w, v = qcore.herm_eig(qcore.hermitize(m), tol=np.inf)
    return (v * _project_simplex(w)) @ qcore.dagger(v)
