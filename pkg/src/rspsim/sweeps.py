"""Parameter sweeps over the named target-state sets and channel comparisons."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import channels, metrics, states, tomography
from .errors import DomainError
from .protocol import rsp_run
from .states import BlochVector

CHANNELS = ("ideal", "depolarizing", "dephasing")
MODES = ("exact", "monte-carlo")
DOMINANCE_TOL = 1e-12

# Pre-agreed target sets, numbered as in the experiment.
STATE_SETS = {
    "1": "polar great circle, x-z plane (r=1, phi=0)",
    "2": "polar great circle, y-z plane (r=1, phi=pi/2)",
    "3": "equator (r=1, theta=pi/2)",
    "4": "small circle r=cos^2(pi/8), x-z plane",
    "5": "zero vector (maximally mixed)",
    "6": "line r in [-1, 1], theta=pi/4, phi=0",
    "7": "line r in [-1, 1], theta=pi/2, phi=0",
}


def expand_state_set(name: str, resolution: int) -> List[BlochVector]:
    """Sample a named set with ``resolution`` points along its free parameter."""
    name = str(name)
    if name not in STATE_SETS:
        raise DomainError(f"unknown state set {name!r}; choose from {', '.join(STATE_SETS)}")
    if resolution < 1:
        raise DomainError("resolution must be at least 1")
    theta = np.linspace(0.0, math.pi, resolution)
    radii = np.linspace(-1.0, 1.0, resolution)
    if name == "1":
        return [BlochVector(1.0, t, 0.0) for t in theta]
    if name == "2":
        return [BlochVector(1.0, t, math.pi / 2) for t in theta]
    if name == "3":
        return [BlochVector(1.0, math.pi / 2, f) for f in np.linspace(0.0, 2 * math.pi, resolution)]
    if name == "4":
        return [BlochVector(math.cos(math.pi / 8) ** 2, t, 0.0) for t in theta]
    if name == "5":
        return [BlochVector(0.0, 0.0, 0.0)]
    if name == "6":
        return [BlochVector(r, math.pi / 4, 0.0) for r in radii]
    return [BlochVector(r, math.pi / 2, 0.0) for r in radii]


def channel_state(channel: str, p: float) -> np.ndarray:
    if channel == "ideal":
        return states.bell_psi_minus()
    if channel == "depolarizing":
        return channels.depolarized_bell(p)
    if channel == "dephasing":
        return channels.dephased_bell(p)
    raise DomainError(f"unknown channel {channel!r}")


def closed_form_fidelity(channel: str, target: BlochVector, p: float) -> float:
    t = target.canonical()
    if channel == "ideal":
        return 1.0
    if channel == "depolarizing":
        return metrics.fidelity_depolarizing_closed(t.r, p)
    return metrics.fidelity_dephasing_closed(t.r, t.theta, p)


@dataclass(frozen=True)
class SweepSpec:
    channel: str = "dephasing"
    p: float = 0.9
    state_set: Optional[str] = "1"
    points: Tuple[Tuple[float, float, float], ...] = ()
    resolution: int = 37
    mode: str = "exact"
    n_counts: float = 1e4
    seed: int = 0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise DomainError(f"unknown channel {self.channel!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p={self.p} outside [0, 1]")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.n_counts <= 0:
            raise DomainError("n_counts must be positive")
        if not self.points and self.state_set is None:
            raise DomainError("need a state set or explicit points")
        if self.state_set is not None and str(self.state_set) not in STATE_SETS:
            raise DomainError(f"unknown state set {self.state_set!r}")

    def targets(self) -> List[BlochVector]:
        if self.points:
            return [BlochVector(r, t, f) for r, t, f in self.points]
        return expand_state_set(self.state_set, self.resolution)


@dataclass(frozen=True)
class SweepRow:
    r: float
    theta: float
    phi: float
    p: float
    simulated_fidelity: float
    closed_form_fidelity: float
    success_probability: float
    abs_difference: float


SWEEP_FIELDS = tuple(f.name for f in fields(SweepRow))


def _reconstructed_fidelity(target_rho, bob, n_counts, seed) -> float:
    settings = tomography.standard_settings(1)
    record = tomography.simulate_counts(bob, settings, n_counts, seed)
    return metrics.fidelity(target_rho, tomography.mle_reconstruct(record))


def run_sweep(spec: SweepSpec) -> List[SweepRow]:
    """Evaluate every target in ``spec`` in order.

    In monte-carlo mode Bob's state is reconstructed from simulated counts
    before comparing; point ``i`` uses the ``i``-th child of ``spec.seed``.
    """
    rho_ab = channel_state(spec.channel, spec.p)
    p = 1.0 if spec.channel == "ideal" else spec.p
    targets = spec.targets()
    seeds = np.random.SeedSequence(spec.seed).spawn(len(targets))
    rows = []
    for target, ss in zip(targets, seeds):
        outcome = rsp_run(rho_ab, target)
        target_rho = states.bloch_to_rho(target)
        if spec.mode == "exact":
            sim = metrics.fidelity(target_rho, outcome.conditional_state)
        else:
            seed = int(ss.generate_state(1)[0])
            sim = _reconstructed_fidelity(target_rho, outcome.conditional_state, spec.n_counts, seed)
        closed = closed_form_fidelity(spec.channel, target, p)
        rows.append(
            SweepRow(
                target.r, target.theta, target.phi, p,
                sim, closed, outcome.success_probability, abs(sim - closed),
            )
        )
    return rows


@dataclass(frozen=True)
class ComparisonRow:
    r: float
    theta: float
    p: float
    F_dephase: float
    F_depol: float
    difference: float


COMPARISON_FIELDS = tuple(f.name for f in fields(ComparisonRow))


def compare_channels(p_list: Sequence[float], resolution: int) -> List[ComparisonRow]:
    """Simulated fidelities of both channels on an (r, theta) grid at phi = 0."""
    if resolution < 2:
        raise DomainError("grid resolution must be at least 2")
    rows = []
    radii = np.linspace(0.0, 1.0, resolution)
    thetas = np.linspace(0.0, math.pi, resolution)
    for p in p_list:
        dep, deph = channels.depolarized_bell(p), channels.dephased_bell(p)
        for r in radii:
            for theta in thetas:
                target = BlochVector(r, theta, 0.0)
                rho = states.bloch_to_rho(target)
                f_deph = metrics.fidelity(rho, rsp_run(deph, target).conditional_state)
                f_dep = metrics.fidelity(rho, rsp_run(dep, target).conditional_state)
                rows.append(ComparisonRow(r, theta, p, f_deph, f_dep, f_deph - f_dep))
    return rows


def dominance_violations(rows: Iterable[ComparisonRow], tol: float = DOMINANCE_TOL) -> List[ComparisonRow]:
    return [row for row in rows if row.difference < -tol]


def summarize(values: Sequence[float]) -> dict:
    a = np.asarray(values, dtype=float)
    return {"min": float(a.min()), "max": float(a.max()), "mean": float(a.mean())}


def format_number(x: float) -> str:
    return f"{x:.12g}"


def write_csv(path, rows, field_names) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(field_names)
        for row in rows:
            d = asdict(row)
            writer.writerow([format_number(d[k]) for k in field_names])
