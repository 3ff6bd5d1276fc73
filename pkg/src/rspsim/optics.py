"""Waveplate Jones matrices and angle solving for Alice's polarization optics.

Alice's first rotation is a quarter-wave plate followed by a half-wave plate
(Jones product HWP(h) @ QWP(q)); the POVM rotation after the birefringent
CNOT is a single half-wave plate. Angles are in radians and can be rounded to
a finite mechanical precision, 2 degrees by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import qcore
from .protocol import RspOutcome, rsp_run_unitaries
from .states import BlochVector, pure_kets

DEFAULT_QUANTIZATION = math.radians(2.0)


def jones_hwp(angle: float) -> np.ndarray:
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=complex)


def jones_qwp(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    off = (1 - 1j) * s * c
    return np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=complex)


def quantize(angle: float, step: float) -> float:
    if step <= 0:
        return float(angle)
    return round(angle / step) * step


@dataclass(frozen=True)
class WaveplateSetting:
    """A QWP then HWP pair. Angles are snapped to ``quantization`` when it is positive."""

    qwp_angle: float
    hwp_angle: float
    quantization: float = DEFAULT_QUANTIZATION

    def __post_init__(self):
        object.__setattr__(self, "qwp_angle", quantize(self.qwp_angle, self.quantization))
        object.__setattr__(self, "hwp_angle", quantize(self.hwp_angle, self.quantization))

    def jones(self) -> np.ndarray:
        return jones_hwp(self.hwp_angle) @ jones_qwp(self.qwp_angle)


class WaveplateFit(NamedTuple):
    setting: WaveplateSetting
    residual: float
    unrounded: WaveplateSetting
    unrounded_residual: float


def _minimize_2d(cost, grid_points: int = 46, starts: int = 3):
    grid = np.linspace(0.0, math.pi, grid_points, endpoint=False)
    scored = sorted((cost((q, h)), q, h) for q in grid for h in grid)
    best = None
    for _, q, h in scored[:starts]:
        res = minimize(
            cost,
            np.array([q, h]),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxfev": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res
    # QWP has period pi; HWP flips sign under h -> h + pi/2
    return best.x[0] % math.pi, best.x[1] % (math.pi / 2)


def gate_infidelity(target, achieved) -> float:
    """1 - |Tr(target^dagger achieved)| / 2, blind to global phase."""
    return max(0.0, 1.0 - float(abs(np.trace(qcore.dagger(target) @ achieved))) / 2.0)


def solve_waveplate_angles(target, quantization: float = DEFAULT_QUANTIZATION) -> WaveplateFit:
    """Find QWP/HWP angles whose product best matches a 2x2 unitary.

    Only a two-parameter family of unitaries is reachable (det is always -i),
    so the residual can stay large; callers should inspect it.
    """
    u = qcore.as_matrix(target)
    if u.shape != (2, 2) or not qcore.allclose(qcore.dagger(u) @ u, np.eye(2), 1e-9):
        raise ValueError("target must be a 2x2 unitary")

    def cost(x):
        return gate_infidelity(u, jones_hwp(x[1]) @ jones_qwp(x[0]))

    q, h = _minimize_2d(cost)
    exact = WaveplateSetting(q, h, quantization=0.0)
    rounded = WaveplateSetting(q, h, quantization=quantization)
    return WaveplateFit(rounded, cost((rounded.qwp_angle, rounded.hwp_angle)), exact, cost((q, h)))


@dataclass(frozen=True)
class RspWaveplates:
    """Alice's three plate angles for one target state."""

    first: WaveplateSetting
    hwp2_angle: float
    transfer_residual: float

    def unitaries(self):
        return self.first.jones(), jones_hwp(self.hwp2_angle)


def rsp_waveplates(target: BlochVector, quantization: float = DEFAULT_QUANTIZATION) -> RspWaveplates:
    """Plate angles that realize the protocol for ``target``.

    QWP1+HWP1 only need to rotate psi onto |0> (diagonal phases on A are
    erased when the ancilla is traced out), and HWP2 at angle h realizes
    U(r) up to a sigma_z that commutes with the CNOT.
    """
    t = target.canonical()
    psi = pure_kets(t.theta, t.phi)[0]

    def cost(x):
        w = jones_hwp(x[1]) @ jones_qwp(x[0])
        return max(0.0, 1.0 - float(abs((w @ psi)[0])) ** 2)

    q, h = _minimize_2d(cost)
    first = WaveplateSetting(q, h, quantization=quantization)
    h2 = 0.5 * math.atan2(math.sqrt((1 - t.r) / 2), math.sqrt((1 + t.r) / 2))
    return RspWaveplates(
        first,
        quantize(h2, quantization),
        cost((first.qwp_angle, first.hwp_angle)),
    )


def rsp_run_waveplates(channel_state, plates: RspWaveplates) -> RspOutcome:
    first, second = plates.unitaries()
    return rsp_run_unitaries(channel_state, first, second)
