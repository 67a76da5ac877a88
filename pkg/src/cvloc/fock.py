"""Entanglement localized by an imperfect single-photon detector, in truncated Fock space.

A vacuum in mode A is mixed on a balanced splitter with mode B of a two-mode
squeezed vacuum ``sqrt(1 - lam^2) sum_n lam^n |n, n>_BC``.  Mode C passes a
splitter of amplitude transmittance ``eta`` before an on/off detector.  A click
heralds the A-B state ``rho1``; no click heralds a separable state.

Density matrices are stored as 4-index arrays ``rho[i, j, k, l] = <i j| rho |k l>``
with ``i, k`` indexing mode A and ``j, l`` mode B, each truncated at ``n_max``
photons.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import comb

from .errors import ShapeError, TruncationError

NEG_EIG_THRESHOLD = -1e-12
DEFAULT_NMAX = 40
DEFAULT_TRACE_TOL = 1e-6


@dataclass(frozen=True)
class SPDParams:
    lam: float
    eta: float
    n_max: int = DEFAULT_NMAX

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"squeezing lam must lie in [0, 1), got {self.lam}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"detector efficiency eta must lie in [0, 1], got {self.eta}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")


@dataclass(frozen=True)
class FockDensityMatrix:
    rho: np.ndarray
    n_max: int
    trace_deficit: float = 0.0

    @property
    def dim(self):
        return self.n_max + 1

    @property
    def matrix(self):
        d = self.dim
        return self.rho.reshape(d * d, d * d)

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))


def psi_n_state(n):
    """Amplitudes of ``|psi_n> = 2^{-n/2} sum_k sqrt(C(n, k)) |k, n-k>``, indexed by ``k``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    k = np.arange(n + 1)
    return np.sqrt(comb(n, k, exact=False)) * 2.0 ** (-n / 2.0)


def click_probability(p):
    """``p1 = lam^2 eta^2 / (1 - lam^2 (1 - eta^2))``."""
    l2, e2 = p.lam**2, p.eta**2
    return l2 * e2 / (1.0 - l2 * (1.0 - e2))


def _tail_mass(p, p1):
    """Exact weight of the ``n > n_max`` terms of the normalised click state."""
    l2 = p.lam**2
    x = l2 * (1.0 - p.eta**2)
    m = p.n_max + 1
    tail = l2**m / (1.0 - l2) - (x**m / (1.0 - x) if x > 0.0 else 0.0)
    return (1.0 - l2) * tail / p1


def rho1(p, trace_tol=DEFAULT_TRACE_TOL):
    """Normalised A-B state heralded by a click, truncated at ``n_max`` photons.

    ``rho1 = (1 - lam^2)/p1 sum_{n>=1} lam^{2n} [1 - (1 - eta^2)^n] |psi_n><psi_n|``.
    The discarded weight is reported as ``trace_deficit``; above ``trace_tol``
    a :class:`TruncationError` asks for a larger ``n_max``.
    """
    p1 = click_probability(p)
    if p1 <= 0.0:
        raise ValueError("click probability is zero (eta = 0 or lam = 0); rho1 is undefined")
    d = p.n_max + 1
    rho = np.zeros((d, d, d, d))
    l2, loss = p.lam**2, 1.0 - p.eta**2
    for n in range(1, p.n_max + 1):
        w = (1.0 - l2) * l2**n * (1.0 - loss**n) / p1
        if w == 0.0:
            break
        amp = psi_n_state(n)
        k = np.arange(n + 1)
        rho[k[:, None], n - k[:, None], k[None, :], n - k[None, :]] += w * np.outer(amp, amp)
    deficit = _tail_mass(p, p1)
    if deficit > trace_tol:
        raise TruncationError(
            f"truncation at n_max={p.n_max} drops weight {deficit:.3e} > {trace_tol:.1e}; increase n_max"
        )
    return FockDensityMatrix(rho, p.n_max, deficit)


def partial_transpose(rho):
    """``(rho^{T_A})_{ij,kl} = rho_{kj,il}`` on a 4-index array."""
    return np.transpose(np.asarray(rho), (2, 1, 0, 3))


def negative_eigenvalues(matrix, threshold=NEG_EIG_THRESHOLD):
    """Eigenvalues below ``threshold`` of a Hermitian matrix.

    The matrix is split into its connected (block-diagonal) components first;
    photon-number conserving states give small blocks.
    """
    nz = np.abs(matrix) > 0.0
    ncomp, labels = connected_components(nz, directed=False)
    neg = []
    for c in range(ncomp):
        idx = np.nonzero(labels == c)[0]
        ev = np.linalg.eigvalsh(matrix[np.ix_(idx, idx)])
        neg.extend(ev[ev < threshold])
    return np.array(neg)


def log_negativity_fock(rho):
    """``log2(1 + 2 |sum of negative eigenvalues of rho^{T_A}|)`` in e-bits."""
    r = rho.rho if isinstance(rho, FockDensityMatrix) else np.asarray(rho)
    if r.ndim != 4 or len(set(r.shape)) != 1:
        raise ShapeError(f"expected a (d, d, d, d) density matrix, got shape {r.shape}")
    d = r.shape[0]
    mat = r.reshape(d * d, d * d)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(mat)))):
        raise ShapeError("density matrix is not Hermitian")
    pt = partial_transpose(r).reshape(d * d, d * d)
    neg = negative_eigenvalues(pt)
    return float(math.log2(1.0 + 2.0 * abs(float(np.sum(neg)))))


def average_localized(p, trace_tol=DEFAULT_TRACE_TOL):
    """``p1 * E_N[rho1]``; the no-click branch is separable and contributes nothing."""
    p1 = click_probability(p)
    if p1 == 0.0:
        return 0.0
    return p1 * log_negativity_fock(rho1(p, trace_tol))


def gaussian_baseline(lam):
    """Best Gaussian (homodyne) localizable entanglement of the same setup.

    ``(n + 1) log2(n + 1) - n log2 n`` with ``n = (1/2)/sqrt(1 - lam^4) - 1/2``.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lam must lie in [0, 1), got {lam}")
    l4 = lam**4
    # 1/sqrt(1-x) - 1 without cancellation for small x
    n = 0.5 * math.expm1(-0.5 * math.log1p(-l4))
    if n == 0.0:
        return 0.0
    return (n + 1.0) * math.log2(n + 1.0) - n * math.log2(n)
