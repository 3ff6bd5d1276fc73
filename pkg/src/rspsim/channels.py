"""Noisy versions of the shared singlet.

Noise is described by its effect on |Psi-><Psi-| only, i.e. by the output
state written as an explicit mixture, since that is the only input the
protocol ever feeds through a channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import qcore, states
from .errors import DomainError

# Two-photon density matrix reconstructed from the SPDC source at p = 0.9,
# basis order HH, HV, VH, VV. Published values are rounded, so this array is
# neither exactly Hermitian nor exactly PSD.
SPDC_RAW = np.array(
    [
        [0.001875, -0.018531 + 0.013719j, 0.002594 + 0.017125j, 0.01 - 0.015437j],
        [-0.018531 + 0.013719j, 0.50125, -0.435688 + 0.002406j, -0.007469 + 0.007281j],
        [0.002594 + 0.017125j, -0.435688 + 0.002406j, 0.494375, -0.007281 + 0.005813j],
        [0.01 + 0.015438j, -0.007469 + 0.007281j, -0.007281 + 0.005813j, 0.0025],
    ],
    dtype=complex,
)
SPDC_FIXTURE_P = 0.9


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"channel parameter p={p} outside [0, 1]")
    return p


@dataclass(frozen=True)
class MixtureChannel:
    """Output of a decoherence map on the singlet, as weighted 4x4 components."""

    components: Tuple[Tuple[float, np.ndarray], ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple((float(w), states.check_density(s)) for w, s in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0) or np.any(weights > 1):
            raise DomainError("mixture weights must lie in [0, 1]")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {weights.sum():.15g}, not 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, np.ndarray]]) -> "MixtureChannel":
        return cls(tuple(pairs))

    def state(self) -> np.ndarray:
        return sum(w * s for w, s in self.components)


def classical_correlation() -> np.ndarray:
    """(|01><01| + |10><10|) / 2."""
    return np.diag([0, 0.5, 0.5, 0]).astype(complex)


def depolarized_bell(p: float) -> np.ndarray:
    """Werner state p |Psi-><Psi-| + (1 - p) I/4."""
    p = _check_p(p)
    return MixtureChannel(
        ((p, states.bell_psi_minus()), (1 - p, np.eye(4, dtype=complex) / 4))
    ).state()


def dephased_bell(p: float) -> np.ndarray:
    """p |Psi-><Psi-| + (1 - p)/2 (|01><01| + |10><10|).

    This is also the form of the SPDC source state with H -> |0>, V -> |1>.
    """
    p = _check_p(p)
    return MixtureChannel(
        ((p, states.bell_psi_minus()), (1 - p, classical_correlation()))
    ).state()


def spdc_fixture(raw: bool = False) -> np.ndarray:
    """The published p=0.9 source reconstruction.

    With ``raw=False`` (default) the printed entries are hermitized and
    projected onto the nearest unit-trace PSD matrix.
    """
    if raw:
        return SPDC_RAW.copy()
    return states.nearest_density_matrix(qcore.hermitize(SPDC_RAW))
