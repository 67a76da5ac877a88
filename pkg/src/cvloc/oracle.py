"""Brute-force checks independent of the closed forms.

* :func:`sweep_gaussian` evaluates conditioning plus logarithmic negativity on
  a Cartesian grid of product measurements, homodyne included as exact grid
  points.
* :func:`simulate_fig1_circuit` builds the single-photon-detector setup from
  beam-splitter unitaries in truncated Fock space.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import TruncationError
from .fock import FockDensityMatrix, SPDParams
from .gaussian import as_cm, log_negativity_from_mu2

MAX_POINTS = 10**7


@dataclass(frozen=True)
class SweepSpec:
    """Per-mode grid: every ``(y, theta)`` pair, plus ``(1, theta)`` homodyne points if requested."""

    y_grid: np.ndarray
    theta_grid: np.ndarray
    include_homodyne: bool = True

    def __post_init__(self):
        y = np.sort(np.asarray(self.y_grid, dtype=np.float64))
        th = np.sort(np.asarray(self.theta_grid, dtype=np.float64))
        if y.size == 0 or th.size == 0:
            raise ValueError("sweep grids must be nonempty")
        if y[0] < 0.0 or y[-1] >= 1.0:
            raise ValueError("y grid must lie in [0, 1); homodyne is added separately")
        object.__setattr__(self, "y_grid", y)
        object.__setattr__(self, "theta_grid", th)

    @classmethod
    def uniform(cls, n_y=60, n_theta=60, include_homodyne=True):
        return cls(np.arange(n_y) / n_y, np.arange(n_theta) * (math.pi / n_theta), include_homodyne)

    def mode_points(self):
        """``(y, theta)`` arrays of the single-mode point set."""
        yy, tt = np.meshgrid(self.y_grid, self.theta_grid, indexing="ij")
        y, t = yy.ravel(), tt.ravel()
        if self.include_homodyne:
            y = np.concatenate([y, np.ones(self.theta_grid.size)])
            t = np.concatenate([t, self.theta_grid])
        return y, t


def _s_of_y(y):
    """``exp(-2 r)`` for ``y = tanh r``; 0 at the homodyne point."""
    return (1.0 - y) / (1.0 + y)


def _blocks(gamma, target, measured):
    g = as_cm(gamma)
    ti = np.concatenate([[2 * m, 2 * m + 1] for m in target])
    mi = np.concatenate([[2 * m, 2 * m + 1] for m in measured])
    return g[np.ix_(ti, ti)], g[np.ix_(ti, mi)], g[np.ix_(mi, mi)]


def evaluate_points(gamma, target, measured, y, theta):
    """``mu2`` of the target pair after product measurements ``(y[:, j], theta[:, j])`` on ``measured``."""
    tgt, cross, gcc = _blocks(gamma, target, measured)
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    theta = np.atleast_2d(np.asarray(theta, dtype=np.float64))
    return _kernels.conditioned_mu2(tgt, cross, gcc, _s_of_y(y), theta)


@dataclass
class SweepResult:
    best_e: float
    best_mu2: float
    best_params: tuple
    table: np.ndarray
    columns: tuple

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.table:
                w.writerow([format(v, ".12g") for v in row])


def _sort_keys(mu2, Y, T):
    k = Y.shape[1]
    # lexsort keys run last-to-first: mu2 is primary
    return tuple(T[:, j] for j in reversed(range(k))) + tuple(Y[:, j] for j in reversed(range(k))) + (mu2,)


def sweep_gaussian(
    gamma, target=(0, 1), measured=(2,), spec=None, max_points=MAX_POINTS, keep_table=True, chunk=2_000_000
):
    """Exhaustive product-measurement sweep.

    Returns the best logarithmic negativity with its per-mode ``(y, theta)``
    (``y = 1`` is homodyne).  Ties are broken by the lexicographic order of
    ``(mu2, y_1, theta_1, ...)``, so the answer does not depend on evaluation
    order.  With ``keep_table=False`` the grid is streamed in chunks and only
    the best point is kept.
    """
    spec = SweepSpec.uniform() if spec is None else spec
    py, pt = spec.mode_points()
    k = len(measured)
    shape = (py.size,) * k
    npts = py.size**k
    if npts > max_points:
        raise ValueError(f"sweep would evaluate {npts:.3e} points (> {max_points:.0e}); coarsen the grid")
    columns = tuple(c for j in range(k) for c in (f"y{j + 1}", f"theta{j + 1}")) + ("mu2", "E")
    table = np.empty((npts if keep_table else 0, 2 * k + 2))
    best = None
    for start in range(0, npts, chunk):
        idx = np.stack(np.unravel_index(np.arange(start, min(npts, start + chunk)), shape), axis=1)
        Y, T = py[idx], pt[idx]
        mu2 = evaluate_points(gamma, target, measured, Y, T)
        tied = np.flatnonzero(mu2 == mu2.min())
        b = tied[np.lexsort(_sort_keys(mu2[tied], Y[tied], T[tied]))[0]]
        cand = (float(mu2[b]),) + tuple(float(v) for v in Y[b]) + tuple(float(v) for v in T[b])
        key = (cand[0],) + tuple(x for pair in zip(Y[b], T[b]) for x in pair)
        if best is None or key < best[0]:
            best = (key, cand)
        if keep_table:
            sl = slice(start, start + mu2.size)
            table[sl, 0 : 2 * k : 2] = Y
            table[sl, 1 : 2 * k : 2] = T
            table[sl, -2] = mu2
            table[sl, -1] = np.maximum(0.0, -np.log2(mu2))
    best_mu2 = best[1][0]
    params = tuple((best[1][1 + j], best[1][1 + k + j]) for j in range(k))
    return SweepResult(log_negativity_from_mu2(best_mu2), best_mu2, params, table, columns)


def sweep_theta(fun, n=10**4):
    """Minimum of ``fun(theta)`` over ``n`` equally spaced phases in ``[0, pi)``."""
    th = np.arange(n) * (math.pi / n)
    vals = np.array([fun(t) for t in th])
    i = int(np.argmin(vals))
    return float(vals[i]), float(th[i])


# ---------------------------------------------------------------------------
# Fock-space circuit
# ---------------------------------------------------------------------------


def beam_splitter_unitary(theta, n_max):
    """Number-basis matrix of ``a_i^+ -> cos a_i^+ + sin a_j^+``, ``a_j^+ -> sin a_i^+ - cos a_j^+``.

    Returned as a ``(d, d, d, d)`` array ``U[p, q, m, n] = <p q| U |m n>``,
    populated on total photon number ``m + n <= n_max`` where the truncated map
    is exactly unitary.
    """
    d = n_max + 1
    c, s = math.cos(theta), math.sin(theta)
    U = np.zeros((d, d, d, d))
    lf = gammaln(np.arange(2 * d) + 1.0)
    for m in range(d):
        for n in range(d - m):
            tot = m + n
            for p in range(m + 1):
                a = math.exp(lf[m] - lf[p] - lf[m - p]) * c**p * s ** (m - p)
                if a == 0.0:
                    continue
                for q in range(n + 1):
                    b = math.exp(lf[n] - lf[q] - lf[n - q]) * s**q * (-c) ** (n - q)
                    if b == 0.0:
                        continue
                    i = p + q
                    norm = math.exp(0.5 * (lf[i] + lf[tot - i] - lf[m] - lf[n]))
                    U[i, tot - i, m, n] += a * b * norm
    return U


def check_unitary(U, n_max, tol=1e-10):
    """Max deviation from unitarity on the ``total <= n_max`` subspace."""
    d = n_max + 1
    keep = np.array([i + j <= n_max for i in range(d) for j in range(d)])
    M = U.reshape(d * d, d * d)[np.ix_(keep, keep)]
    err = float(np.max(np.abs(M.T @ M - np.eye(M.shape[0]))))
    if err > tol:
        raise AssertionError(f"beam splitter not unitary on truncated space: {err:.3e}")
    return err


def simulate_fig1_circuit(p, branch="click", amp_tol=1e-6):
    """Conditional A-B state of the single-photon-detector circuit.

    ``|0>_A |lam>_BC |0>_D``, then ``U_CD`` (amplitude transmittance ``eta``)
    and the balanced ``U_AB``; mode C is projected with ``1 - |0><0|``
    (``branch="click"``) or ``|0><0|``, and C, D are traced out.  Returns
    ``(rho, probability)``.
    """
    if not isinstance(p, SPDParams):
        raise TypeError("expected SPDParams")
    n_max = p.n_max
    d = n_max + 1
    lam = p.lam
    dropped = lam ** (2 * d)
    if dropped > amp_tol:
        raise TruncationError(f"TMSV weight beyond n_max={n_max} is {dropped:.3e}; increase n_max")

    psi = np.zeros((d, d, d, d))
    n = np.arange(d)
    psi[0, n, n, 0] = math.sqrt(1.0 - lam * lam) * lam**n

    u_cd = beam_splitter_unitary(math.acos(p.eta), n_max)
    u_ab = beam_splitter_unitary(math.pi / 4, n_max)
    check_unitary(u_cd, n_max)
    check_unitary(u_ab, n_max)
    # U_CD on (C, D); U_AB with B as the first port so |0>_A|n>_B -> |psi_n>
    psi = np.einsum("xycd,abcd->abxy", u_cd, psi, optimize=True)
    psi = np.einsum("yxba,abcd->xycd", u_ab, psi, optimize=True)

    if branch == "click":
        psi[:, :, 0, :] = 0.0
    elif branch == "no_click":
        psi[:, :, 1:, :] = 0.0
    else:
        raise ValueError("branch must be 'click' or 'no_click'")
    M = psi.reshape(d * d, d * d)
    rho = M @ M.T
    prob = float(np.trace(rho))
    rho = (rho / prob).reshape(d, d, d, d)
    return FockDensityMatrix(rho, n_max, dropped), prob
