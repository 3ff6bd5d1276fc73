"""Simulated polarization tomography: counts, linear inversion, and MLE.

Projectors are labelled by polarization letters, one per photon:
H=|0>, V=|1>, D=(H+V)/sqrt2, A=(H-V)/sqrt2, R=(H+iV)/sqrt2, L=(H-iV)/sqrt2.
A two-photon setting such as ``"HD"`` is the product projector, first letter
on the most significant factor.

Record file format (UTF-8 text)::

    # rspsim tomography record
    # total_per_setting = 10000
    # seed = 7
    # generator = numpy.PCG64.poisson
    # exact = false
    HH 10021
    HV 3
    ...

Header lines start with ``#`` and hold ``key = value`` pairs; every other
non-blank line is ``<label> <count>``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from . import qcore, states
from .errors import NonConvergenceError, NotInformationallyCompleteError

_S = 1 / math.sqrt(2)
POLARIZATION_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}

# 16-setting two-photon scheme of James, Kwiat, Munro & White (2001)
MINIMAL_TWO_QUBIT = (
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
)
MINIMAL_ONE_QUBIT = ("H", "V", "D", "R")

GENERATOR_ID = "numpy.PCG64.poisson"
MAX_EVALUATIONS = 100_000
LIKELIHOOD_TOL = 1e-9


def standard_settings(n_qubits: int, minimal: bool = False) -> tuple:
    """Informationally complete label sets: all 6**n products, or the minimal 4**n."""
    if n_qubits not in (1, 2):
        raise ValueError("only one- and two-qubit tomography is supported")
    if minimal:
        return MINIMAL_ONE_QUBIT if n_qubits == 1 else MINIMAL_TWO_QUBIT
    return tuple("".join(t) for t in itertools.product("HVDARL", repeat=n_qubits))


def setting_ket(label: str) -> np.ndarray:
    ket = np.ones(1, dtype=complex)
    for ch in label:
        ket = np.kron(ket, POLARIZATION_KETS[ch])
    return ket


def projector_stack(settings: Sequence[str]) -> np.ndarray:
    return np.array([states.projector(setting_ket(s)) for s in settings])


def born_probabilities(rho, settings: Sequence[str]) -> np.ndarray:
    p = np.real(np.einsum("sij,ji->s", projector_stack(settings), qcore.as_matrix(rho)))
    return np.clip(p, 0.0, None)


@dataclass
class TomographyRecord:
    """Counts observed for each projector setting.

    ``exact`` marks a noiseless record whose counts are the expected values
    N * Tr(P rho) rather than integers.
    """

    settings: tuple
    counts: np.ndarray
    total_per_setting: float
    seed: Optional[int] = None
    generator: str = GENERATOR_ID
    exact: bool = False
    _projectors: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.settings = tuple(self.settings)
        self.counts = np.asarray(self.counts, dtype=float if self.exact else np.int64)
        if len(self.counts) != len(self.settings):
            raise ValueError("counts and settings differ in length")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.total_per_setting <= 0:
            raise ValueError("total_per_setting must be positive")
        widths = {len(s) for s in self.settings}
        if len(widths) != 1 or any(ch not in POLARIZATION_KETS for s in self.settings for ch in s):
            raise ValueError("settings must be equal-length strings over HVDARL")

    @property
    def n_qubits(self) -> int:
        return len(self.settings[0])

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def projectors(self) -> np.ndarray:
        if self._projectors is None:
            self._projectors = projector_stack(self.settings)
        return self._projectors

    def to_text(self) -> str:
        lines = [
            "# rspsim tomography record",
            f"# total_per_setting = {self.total_per_setting!r}",
            f"# seed = {self.seed}",
            f"# generator = {self.generator}",
            f"# exact = {str(self.exact).lower()}",
        ]
        for s, c in zip(self.settings, self.counts):
            lines.append(f"{s} {float(c)!r}" if self.exact else f"{s} {int(c)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TomographyRecord":
        meta, settings, counts = {}, [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
                continue
            label, count = line.split()
            settings.append(label)
            counts.append(count)
        exact = meta.get("exact", "false") == "true"
        seed = meta.get("seed", "None")
        return cls(
            settings=tuple(settings),
            counts=[float(c) if exact else int(c) for c in counts],
            total_per_setting=float(meta["total_per_setting"]),
            seed=None if seed == "None" else int(seed),
            generator=meta.get("generator", GENERATOR_ID),
            exact=exact,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TomographyRecord":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _default_settings(rho, settings):
    if settings is not None:
        return tuple(settings)
    n = int(round(math.log2(qcore.as_matrix(rho).shape[0])))
    return standard_settings(n)


def simulate_counts(rho, settings=None, total_per_setting: float = 1e4, seed: int = 0) -> TomographyRecord:
    """Poisson coincidence counts with mean ``total_per_setting * Tr(P rho)``."""
    settings = _default_settings(rho, settings)
    rng = np.random.default_rng(seed)
    lam = total_per_setting * born_probabilities(rho, settings)
    return TomographyRecord(settings, rng.poisson(lam), total_per_setting, seed=seed)


def expected_counts(rho, settings=None, total_per_setting: float = 1e4) -> TomographyRecord:
    """Noiseless record: counts equal their expectation values."""
    settings = _default_settings(rho, settings)
    lam = total_per_setting * born_probabilities(rho, settings)
    return TomographyRecord(settings, lam, total_per_setting, generator="none", exact=True)


def pauli_basis(n_qubits: int) -> np.ndarray:
    ops = (states.I2,) + states.PAULIS
    return np.array([qcore.kron(*t) for t in itertools.product(ops, repeat=n_qubits)])


def _design_matrix(record: TomographyRecord) -> np.ndarray:
    basis = pauli_basis(record.n_qubits)
    return np.real(np.einsum("sij,kji->sk", record.projectors, basis)) / record.dim


def linear_inversion(record: TomographyRecord) -> np.ndarray:
    """Least-squares Pauli-coefficient estimate, normalized to unit trace.

    The result is Hermitian but may have negative eigenvalues under shot noise.
    """
    a = _design_matrix(record)
    d2 = record.dim**2
    if np.linalg.matrix_rank(a) < d2:
        raise NotInformationallyCompleteError(
            f"{len(record.settings)} settings span fewer than {d2} Pauli coefficients"
        )
    y = record.counts / record.total_per_setting
    coeffs, *_ = np.linalg.lstsq(a, y, rcond=None)
    basis = pauli_basis(record.n_qubits)
    rho = qcore.hermitize(np.einsum("k,kij->ij", coeffs, basis) / record.dim)
    return rho / np.real(np.trace(rho))


def _tril_layout(d: int):
    return np.tril_indices(d, -1)


def t_to_rho(x: np.ndarray, d: int) -> np.ndarray:
    """Map d**2 reals to T^dagger T / Tr, T lower triangular with real diagonal."""
    t = np.diag(x[:d]).astype(complex)
    rows, cols = _tril_layout(d)
    m = len(rows)
    t[rows, cols] = x[d : d + m] + 1j * x[d + m :]
    rho = qcore.dagger(t) @ t
    return rho / np.real(np.trace(rho))


def rho_to_t(rho: np.ndarray) -> np.ndarray:
    """Inverse of :func:`t_to_rho` for a positive-definite ``rho``."""
    d = rho.shape[0]
    rev = np.eye(d)[::-1]
    lower = np.linalg.cholesky(rev @ rho @ rev)
    t = qcore.dagger(rev @ lower @ rev)
    rows, cols = _tril_layout(d)
    return np.concatenate([np.real(np.diag(t)), np.real(t[rows, cols]), np.imag(t[rows, cols])])


def _deviance(record: TomographyRecord):
    """Negative Poisson log-likelihood shifted so that its minimum is near 0."""
    proj = record.projectors
    counts = record.counts.astype(float)
    n = record.total_per_setting
    with np.errstate(divide="ignore", invalid="ignore"):
        c_log_c = np.where(counts > 0, counts * np.log(np.where(counts > 0, counts, 1.0)), 0.0)
    d = record.dim
    rows, cols = _tril_layout(d)
    m = len(rows)
    const = float(np.sum(c_log_c))

    def f(x):
        t = np.diag(x[:d]).astype(complex)
        t[rows, cols] = x[d : d + m] + 1j * x[d + m :]
        g = t.conj().T @ t
        tr = np.real(np.trace(g))
        mu = n * np.real(np.einsum("sij,ji->s", proj, g)) / tr
        mu = np.maximum(mu, 1e-300)
        # pins the scale of T, which the normalized likelihood ignores
        return float(np.sum(mu - counts - counts * np.log(mu)) + const + (tr - 1.0) ** 2)

    return f


def log_likelihood(record: TomographyRecord, rho) -> float:
    """sum_s counts_s log(N p_s) - N p_s."""
    mu = record.total_per_setting * born_probabilities(rho, record.settings)
    mu = np.maximum(mu, 1e-300)
    return float(np.sum(record.counts * np.log(mu) - mu))


def mle_reconstruct(
    record: TomographyRecord,
    initial=None,
    max_evaluations: int = MAX_EVALUATIONS,
    tol: float = LIKELIHOOD_TOL,
) -> np.ndarray:
    """Maximum-likelihood density matrix with a Cholesky parameterization.

    Powell's derivative-free direction-set search stops once a full sweep
    over its search directions improves the log-likelihood by less than
    ``tol``. The start point is the PSD projection of the linear-inversion
    estimate, nudged to full rank so it has a Cholesky factor.

    Raises:
        NonConvergenceError: after ``max_evaluations`` objective calls; the
            best density matrix so far is attached as ``best``.
    """
    d = record.dim
    if initial is None:
        initial = states.nearest_density_matrix(linear_inversion(record))
    start = (1 - 1e-8) * qcore.as_matrix(initial) + 1e-8 * np.eye(d) / d
    x0 = rho_to_t(start)
    f = _deviance(record)
    f0 = f(x0)
    res = minimize(
        f,
        x0,
        method="Powell",
        # scipy tests 2*(f_prev - f) <= ftol*(|f_prev| + |f|) once per sweep
        options={"maxfev": max_evaluations, "xtol": 1e-4, "ftol": tol / max(abs(f0), 1.0)},
    )
    x = res.x if res.fun <= f0 else x0
    if res.nfev >= max_evaluations and not res.success:
        raise NonConvergenceError(
            f"MLE did not converge within {max_evaluations} evaluations",
            best=qcore.hermitize(t_to_rho(x, d)),
            value=min(res.fun, f0),
        )
    return qcore.hermitize(t_to_rho(x, d))
