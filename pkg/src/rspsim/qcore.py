"""Dense complex matrix helpers for small (dimension <= 16) quantum operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything here is
a pure function; inputs are never modified in place.

The Hermitian eigensolver is a cyclic complex Jacobi iteration rather than a
LAPACK call, so the eigenvector ordering and phase convention are fully
determined by this module.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, NotPSDError

HERMITIAN_TOL = 1e-9
PSD_FLOOR = -1e-9
EQ_TOL = 1e-10

# Eigenvalues below n * _NOISE_FLOOR * max(spectral radius, 1) are roundoff, not signal.
_NOISE_FLOOR = 64 * np.finfo(float).eps

_MAX_SWEEPS = 100


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermitize(m) -> np.ndarray:
    a = as_matrix(m)
    return 0.5 * (a + dagger(a))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a)), initial=0.0) <= tol


def allclose(a, b, tol: float = EQ_TOL) -> bool:
    """Max-abs-entry comparison, the equality notion used throughout."""
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and float(np.max(np.abs(a - b), initial=0.0)) <= tol


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    if not factors:
        raise DimensionError("kron needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        b = as_matrix(f)
        (ra, ca), (rb, cb) = out.shape, b.shape
        out = (out[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)
    return out


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduce ``rho`` on a tensor product of ``dims`` to the subsystems in ``keep``.

    Subsystem 0 is the most significant Kronecker factor. ``keep`` may be an int
    or an iterable of indices; the kept subsystems stay in their original order.
    """
    a = as_matrix(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise DimensionError(f"rho has shape {a.shape}, dims {dims} need {total}x{total}")
    keep = {int(keep)} if np.isscalar(keep) else {int(k) for k in keep}
    if not keep <= set(range(len(dims))):
        raise DimensionError(f"keep={sorted(keep)} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = a.reshape(dims + dims)
    for i in sorted(set(range(n)) - keep, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d_keep = int(np.prod([dims[i] for i in sorted(keep)]))
    return t.reshape(d_keep, d_keep)


def _jacobi_rotation(a: np.ndarray, p: int, q: int):
    """Unitary J acting on rows/cols (p, q) such that (J^H a J)[p, q] == 0."""
    apq = a[p, q]
    g = abs(apq)
    phase = apq / g
    tau = (a[q, q].real - a[p, p].real) / (2.0 * g)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.hypot(1.0, t)
    s = t * c
    return c, s * phase


def herm_eig(m, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    The input is hermitized first. Eigenvalues are returned ascending; each
    eigenvector's first non-negligible component is made real and positive.

    Raises:
        DimensionError: if ``m`` is not square.
        ValueError: if ``m`` is farther than ``tol`` from Hermitian.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"herm_eig needs a square matrix, got {a.shape}")
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    a = hermitize(a)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)

    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2))
        if off <= 1e-16 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                c, se = _jacobi_rotation(a, p, q)
                # columns p, q of A <- A J ; rows p, q <- J^H A
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - np.conj(se) * aq
                a[:, q] = se * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - se * aq
                a[q, :] = np.conj(se) * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - np.conj(se) * vq
                v[:, q] = se * vp + c * vq

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for k in range(n):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            lead = col[idx[0]]
            v[:, k] = col * (np.conj(lead) / abs(lead))
    return HermitianEig(w, v)


def clean_spectrum(w: np.ndarray, floor: float = PSD_FLOOR) -> np.ndarray:
    """Clamp a PSD spectrum: raise below ``floor``, zero negatives and roundoff."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < floor:
        raise NotPSDError(f"eigenvalue {w.min():.3e} below PSD floor {floor:.0e}")
    cutoff = _NOISE_FLOOR * max(np.max(np.abs(w), initial=0.0), 1.0) * len(w)
    return np.where(w > cutoff, w, 0.0)


def sqrt_psd(m) -> np.ndarray:
    """Principal square root of a PSD matrix via its eigendecomposition."""
    w, v = herm_eig(m)
    w = clean_spectrum(w)
    return (v * np.sqrt(w)) @ dagger(v)


def expectation(op, rho) -> complex:
    """Tr(op @ rho) without forming the product."""
    return complex(np.einsum("ij,ji->", as_matrix(op), as_matrix(rho)))
