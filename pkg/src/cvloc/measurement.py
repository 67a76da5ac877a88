"""Conditioning a Gaussian state on a Gaussian measurement of one mode.

Measurements are projections onto pure squeezed states with covariance
``U(theta) V(r) U(theta)^T``.  As ``r -> inf`` the p-variance of that state
along ``u(theta) = (sin theta, cos theta)`` vanishes, so the limit is homodyne
detection of the quadrature ``x sin(theta) + p cos(theta)``: ``theta = 0``
measures p, ``theta = pi/2`` measures x.

Conditional covariance matrices do not depend on the measurement outcome, so
no displacement is tracked.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError, UnphysicalStateError
from .gaussian import TOL_PHYS, as_cm, local_symplectic, rotation, squeezer

COND_LIMIT = 1e12


@dataclass(frozen=True)
class MeasurementCM:
    """Pure squeezed-state measurement ``U(theta) V(r) U(theta)^T``, ``V = diag(e^{2r}, e^{-2r})``.

    Kept as ``(r, theta)`` so conditioning can stay accurate at large ``r``,
    where the 2x2 matrix itself no longer resolves its small eigenvalue.
    Converts to an ndarray wherever a matrix is expected.
    """

    r: float
    theta: float

    @property
    def matrix(self):
        U = rotation(self.theta)
        m = U @ squeezer(self.r) @ U.T
        return 0.5 * (m + m.T)

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)

    @property
    def shape(self):
        return (2, 2)


def pure_measurement_cm(r, theta):
    """Covariance matrix ``U(theta) V(r) U(theta)^T`` of a pure squeezed state (det = 1)."""
    if not math.isfinite(r):
        raise ValueError("r must be finite; use condition_on_homodyne for the r -> inf limit")
    return MeasurementCM(float(r), float(theta))


def homodyne_direction(theta):
    """Unit vector of the quadrature measured in the ``r -> inf`` limit at phase ``theta``."""
    return np.array([np.sin(theta), np.cos(theta)])


@dataclass(frozen=True)
class PartitionedCM:
    """Split of an N-mode CM into the kept modes and one measured mode."""

    kept: np.ndarray
    measured: np.ndarray
    cross: np.ndarray
    mode: int

    def reassemble(self):
        n = self.kept.shape[0] // 2 + 1
        idx = [k for k in range(2 * n) if k // 2 != self.mode] + [2 * self.mode, 2 * self.mode + 1]
        full = np.block([[self.kept, self.cross], [self.cross.T, self.measured]])
        out = np.empty_like(full)
        out[np.ix_(idx, idx)] = full
        return out


def partition(gamma, mode):
    g = as_cm(gamma)
    n = g.shape[0] // 2
    if n < 2:
        raise DimensionError("need at least two modes to condition on one of them")
    if not 0 <= mode < n:
        raise DimensionError(f"mode {mode} out of range for {n} modes")
    meas = [2 * mode, 2 * mode + 1]
    keep = [k for k in range(2 * n) if k // 2 != mode]
    return PartitionedCM(
        kept=g[np.ix_(keep, keep)],
        measured=g[np.ix_(meas, meas)],
        cross=g[np.ix_(keep, meas)],
        mode=mode,
    )


def _inverse_sum_pure(h, r, theta):
    """``(h + U V(r) U^T)^{-1}`` without forming ``e^{2r}``.

    With ``s = e^{-2r}`` and ``Q = diag(sqrt s, 1)``:
    ``U Q [Q U^T h U Q + diag(1, s)]^{-1} Q U^T``, regular as ``s -> 0``.
    """
    U = rotation(theta)
    s = math.exp(-2.0 * r)
    q = np.array([math.sqrt(s), 1.0])
    inner = q[:, None] * (U.T @ h @ U) * q[None, :] + np.diag([1.0, s])
    return U @ (q[:, None] * np.linalg.inv(inner) * q[None, :]) @ U.T


def condition_on_mode(gamma, mode, m):
    """CM of the remaining modes after projecting ``mode`` onto a Gaussian state with CM ``m``.

    Schur complement ``kept - cross (measured + m)^{-1} cross^T``.  A
    :class:`MeasurementCM` (from :func:`pure_measurement_cm`) is handled in a
    form that stays exact for arbitrarily large ``r``.
    """
    p = partition(gamma, mode)
    if isinstance(m, MeasurementCM):
        hinv = _inverse_sum_pure(p.measured, m.r, m.theta)
    else:
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (2, 2):
            raise DimensionError(f"measurement CM must be 2x2, got {m.shape}")
        h = p.measured + m
        if np.linalg.cond(h) > COND_LIMIT:
            raise NumericError("measured block plus measurement CM is singular")
        hinv = np.linalg.inv(h)
    out = p.kept - p.cross @ hinv @ p.cross.T
    return 0.5 * (out + out.T)


def condition_on_homodyne(gamma, mode, theta):
    """Exact ``r -> inf`` limit of :func:`condition_on_mode`: homodyne of ``u(theta)``.

    ``kept - cross P (P measured P)^+ P cross^T`` with ``P = u u^T``; the
    rank-1 pseudo-inverse reduces to ``u u^T / (u^T measured u)``.
    """
    p = partition(gamma, mode)
    u = homodyne_direction(theta)
    var = float(u @ p.measured @ u)
    if var <= 0.0:
        raise NumericError(f"measured quadrature variance {var:.3e} is not positive")
    v = p.cross @ u
    out = p.kept - np.outer(v, v) / var
    return 0.5 * (out + out.T)


def condition_on_modes(gamma, modes, measurements):
    """Sequentially condition on several modes.

    ``measurements`` holds one entry per mode: a 2x2 CM, or ``("homodyne", theta)``.
    Mode indices refer to the original state.
    """
    g = np.asarray(gamma, dtype=np.float64)
    remaining = list(range(g.shape[0] // 2))
    for mode, meas in zip(modes, measurements):
        pos = remaining.index(mode)
        if isinstance(meas, tuple) and meas[0] == "homodyne":
            g = condition_on_homodyne(g, pos, meas[1])
        else:
            g = condition_on_mode(g, pos, meas)
        remaining.pop(pos)
    return g


def standardize_measured_mode(gamma, mode):
    """Bring the 2x2 block of ``mode`` to ``c * identity`` by a local symplectic.

    Returns ``(gamma', c)`` with ``c = sqrt(det block)``.  The local operation
    on the measured mode is absorbed by the measurement optimisation, so the
    localizable entanglement is unchanged.
    """
    g = as_cm(gamma)
    n = g.shape[0] // 2
    if not 0 <= mode < n:
        raise DimensionError(f"mode {mode} out of range for {n} modes")
    blk = g[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]
    det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
    if det < (1.0 - TOL_PHYS) ** 2 or blk[0, 0] <= 0.0:
        raise UnphysicalStateError(
            f"mode {mode} block has det {det:.6g} < 1", witness=float(np.sqrt(max(det, 0.0)))
        )
    c = float(np.sqrt(det))
    if np.allclose(blk, c * np.eye(2), rtol=0.0, atol=1e-14 * max(1.0, c)):
        return g.copy(), c
    w, v = np.linalg.eigh(blk)
    S2 = np.sqrt(c) * (v @ np.diag(w**-0.5) @ v.T)
    S = local_symplectic(n, mode, S2)
    out = S @ g @ S.T
    out = 0.5 * (out + out.T)
    out[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = c * np.eye(2)
    return out, c
