"""Remote state preparation with an ancilla-assisted POVM.

Alice holds A, Bob holds B, and Alice's ancilla a starts in |0>. The joint
register is ordered A (x) B (x) a with A the most significant factor. Alice
applies U(theta, phi)^dagger to A, a CNOT from A onto a, then U(r) to A,
and finally measures A in the computational basis. Outcome 1 leaves Bob
holding the target state when the shared pair is an ideal singlet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import qcore
from .errors import (
    DegeneratePostselectionError,
    DimensionError,
    DomainError,
    UnsupportedCorrectionError,
)
from .states import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, BlochVector

P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
DIMS_ABa = (2, 2, 2)
MIN_PROBABILITY = 1e-15


@dataclass(frozen=True)
class RspOutcome:
    """Bob's state conditioned on Alice reporting 1, and how often that happens.

    The outcome-0 branch is kept for inspection; ``branch0_state`` is None when
    that branch has zero probability.
    """

    conditional_state: np.ndarray
    success_probability: float
    branch0_state: Optional[np.ndarray] = None
    branch0_probability: float = 0.0


def u_theta_phi(theta: float, phi: float) -> np.ndarray:
    """Rotation taking |0> to psi(theta, phi)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, -np.conj(e) * s], [e * s, c]], dtype=complex)


def u_r(r: float) -> np.ndarray:
    """Real rotation on A that sets the POVM weights (1 +- r)/2."""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"u_r needs r in [0, 1], got {r}")
    a, b = math.sqrt((1 + r) / 2), math.sqrt((1 - r) / 2)
    return np.array([[a, -b], [b, a]], dtype=complex)


def cnot_A_to_a() -> np.ndarray:
    """CNOT on (control, target) = (A, a) as a 4x4 matrix."""
    return qcore.kron(P0, I2) + qcore.kron(P1, SIGMA_X)


def _on_A(u) -> np.ndarray:
    return qcore.kron(u, I2, I2)


# B sits between control and target
_CNOT_ABa = qcore.kron(P0, I2, I2) + qcore.kron(P1, I2, SIGMA_X)
_PROJ_ABa = {0: _on_A(P0), 1: _on_A(P1)}


def _branch(rho_aba: np.ndarray, outcome: int):
    m = _PROJ_ABa[outcome]
    unnorm = m @ rho_aba @ m
    prob = float(np.real(np.trace(unnorm)))
    if prob < MIN_PROBABILITY:
        return None, max(prob, 0.0)
    bob = qcore.partial_trace(unnorm, DIMS_ABa, keep=1) / prob
    return qcore.hermitize(bob), prob


def rsp_run_unitaries(channel_state, first, second) -> RspOutcome:
    """Run the procedure with arbitrary single-qubit unitaries on A.

    ``first`` is applied before the CNOT and ``second`` after it. The
    waveplate simulation uses this entry point with Jones matrices.
    """
    rho_ab = qcore.as_matrix(channel_state)
    if rho_ab.shape != (4, 4):
        raise DimensionError(f"channel state must be 4x4, got {rho_ab.shape}")
    rho = qcore.kron(rho_ab, P0)
    gate = _on_A(second) @ _CNOT_ABa @ _on_A(first)
    rho = gate @ rho @ qcore.dagger(gate)

    bob1, prob1 = _branch(rho, 1)
    if bob1 is None:
        raise DegeneratePostselectionError(f"outcome 1 has probability {prob1:.3e}")
    bob0, prob0 = _branch(rho, 0)
    return RspOutcome(bob1, prob1, bob0, prob0)


def rsp_run(channel_state, target: BlochVector) -> RspOutcome:
    """Remotely prepare ``target`` through ``channel_state`` and post-select outcome 1."""
    t = target.canonical()
    return rsp_run_unitaries(
        channel_state, qcore.dagger(u_theta_phi(t.theta, t.phi)), u_r(t.r)
    )


_CORRECTIONS = {
    # pi rotation about y flips every Bloch vector in the x-z plane
    "polar": 1j * SIGMA_Y,
    "polar-great-circle": 1j * SIGMA_Y,
    # pi rotation about z flips every Bloch vector in the x-y plane
    "equatorial": SIGMA_Z,
    "equatorial-circle": SIGMA_Z,
}


def correct_result0(ensemble: str, state) -> np.ndarray:
    """Bob's fix-up when Alice reports 0, for the two ensembles that admit one.

    ``polar`` is the great circle in the x-z plane (phi = 0), ``equatorial``
    the circle theta = pi/2.
    """
    try:
        u = _CORRECTIONS[ensemble]
    except KeyError:
        raise UnsupportedCorrectionError(
            f"no result-0 correction for ensemble {ensemble!r}"
        ) from None
    rho = qcore.as_matrix(state)
    return u @ rho @ qcore.dagger(u)

