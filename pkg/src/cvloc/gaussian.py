"""Covariance-matrix algebra for Gaussian states.

Conventions used throughout the package:

* quadratures are interleaved, ``R = (x1, p1, ..., xN, pN)``;
* the vacuum covariance matrix is the identity, so a physical state has every
  symplectic eigenvalue >= 1;
* the symplectic form is ``Omega = J (+) ... (+) J`` with ``J = [[0, 1], [-1, 0]]``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError, ShapeError, UnphysicalStateError

TOL_PHYS = 1e-9
SYMMETRY_RTOL = 1e-12
PAIRING_RTOL = 1e-10
DISCRIMINANT_CLAMP = 1e-10

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes):
    """Return the ``2N x 2N`` symplectic form for ``n_modes`` modes."""
    if n_modes < 1:
        raise DimensionError(f"n_modes must be positive, got {n_modes}")
    return np.kron(np.eye(n_modes), J2)


def as_cm(gamma):
    """Coerce ``gamma`` to a float array and check it is square, even-sized, symmetric."""
    g = np.asarray(gamma, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionError(f"covariance matrix must be square, got shape {g.shape}")
    if g.shape[0] == 0 or g.shape[0] % 2:
        raise DimensionError(f"covariance matrix needs even dimension, got {g.shape[0]}")
    bound = SYMMETRY_RTOL * np.maximum(1.0, np.abs(g))
    if np.any(np.abs(g - g.T) > bound):
        worst = float(np.max(np.abs(g - g.T)))
        raise ShapeError(f"covariance matrix is not symmetric (max |g - g^T| = {worst:.3e})")
    return g


def n_modes_of(gamma):
    return np.shape(gamma)[0] // 2


def symplectic_eigenvalues(gamma):
    """Symplectic eigenvalues of ``gamma``, sorted descending.

    Computed from ``eig(Omega gamma) = {+-i nu_k}``; each eigenvalue with
    positive imaginary part is matched greedily to its nearest conjugate.
    Raises :class:`NumericError` if the spectrum does not split into
    conjugate imaginary pairs (``gamma`` far from positive definite).
    """
    g = as_cm(gamma)
    n = n_modes_of(g)
    ev = np.linalg.eigvals(symplectic_form(n) @ g)
    scale = max(1.0, float(np.max(np.abs(ev))))
    tol = PAIRING_RTOL * scale
    if np.any(np.abs(ev.real) > tol):
        raise NumericError("eigenvalues of Omega*gamma are not purely imaginary")
    # Round-off can put a conjugate pair on the same side of the real axis
    # for degenerate spectra; sorting by imag keeps the split balanced.
    order = np.argsort(ev.imag)
    neg = list(ev[order[:n]])
    pos = ev[order[n:]]
    nus = []
    for z in pos:
        k = int(np.argmin([abs(z - np.conj(w)) for w in neg]))
        if abs(z - np.conj(neg[k])) > tol:
            raise NumericError("eigenvalues of Omega*gamma do not form conjugate pairs")
        nus.append(0.5 * (z.imag - neg[k].imag))
        neg.pop(k)
    return np.sort(np.abs(np.array(nus)))[::-1]


@dataclass(frozen=True)
class ValidityReport:
    symmetric: bool
    physical: bool
    min_symplectic_eigenvalue: float

    def __bool__(self):
        return self.physical


def validate_cm(gamma):
    """Check that ``gamma`` is a physical covariance matrix.

    Dimension problems raise :class:`DimensionError`, asymmetry raises
    :class:`ShapeError`; otherwise a :class:`ValidityReport` is returned whose
    ``min_symplectic_eigenvalue`` is the witness.  When ``gamma`` is not
    positive definite no symplectic spectrum exists and the smallest ordinary
    eigenvalue (``<= 0``) is reported instead.
    """
    g = as_cm(gamma)
    lo = float(np.linalg.eigvalsh(g)[0])
    if lo <= 0.0:
        return ValidityReport(True, False, lo)
    nu_min = float(symplectic_eigenvalues(g)[-1])
    return ValidityReport(True, nu_min >= 1.0 - TOL_PHYS, nu_min)


def require_physical(gamma, what="covariance matrix"):
    report = validate_cm(gamma)
    if not report.physical:
        raise UnphysicalStateError(
            f"{what} is unphysical: smallest symplectic eigenvalue "
            f"{report.min_symplectic_eigenvalue:.12g} < 1",
            witness=report.min_symplectic_eigenvalue,
        )
    return np.asarray(gamma, dtype=np.float64)


def mode_slice(mode):
    return slice(2 * mode, 2 * mode + 2)


def select_modes(gamma, modes):
    """Reduced covariance matrix of ``modes`` (in the given order)."""
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    return np.asarray(gamma)[np.ix_(idx, idx)]


def ptranspose_two_mode(gamma_ab, transposed_mode=1):
    """Partial transpose of a two-mode CM: flip the sign of one mode's p quadrature."""
    g = as_cm(gamma_ab)
    if g.shape != (4, 4):
        raise DimensionError(f"two-mode CM must be 4x4, got {g.shape}")
    if transposed_mode not in (0, 1):
        raise DimensionError(f"transposed_mode must be 0 or 1, got {transposed_mode}")
    lam = np.ones(4)
    lam[2 * transposed_mode + 1] = -1.0
    return lam[:, None] * g * lam[None, :]


@dataclass(frozen=True)
class TwoModeBlocks:
    """``gamma_AB = [[A, C], [C^T, B]]`` split into 2x2 blocks."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @classmethod
    def from_cm(cls, gamma_ab):
        g = as_cm(gamma_ab)
        if g.shape != (4, 4):
            raise DimensionError(f"two-mode CM must be 4x4, got {g.shape}")
        return cls(g[:2, :2].copy(), g[2:, 2:].copy(), g[:2, 2:].copy())

    def to_cm(self):
        return np.block([[self.A, self.C], [self.C.T, self.B]])


def _det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def symplectic_invariants(blocks):
    """Return ``(delta, Delta)`` with ``delta = det A + det B - 2 det C`` and ``Delta = det gamma``."""
    if not isinstance(blocks, TwoModeBlocks):
        blocks = TwoModeBlocks.from_cm(blocks)
    delta = _det2(blocks.A) + _det2(blocks.B) - 2.0 * _det2(blocks.C)
    return float(delta), float(np.linalg.det(blocks.to_cm()))


def eigs_from_invariants(delta, Delta):
    """Symplectic eigenvalues ``(mu1, mu2)``, ``mu2 <= mu1``, of the partial transpose."""
    disc = delta * delta - 4.0 * Delta
    if disc < 0.0:
        if disc < -DISCRIMINANT_CLAMP * max(1.0, delta * delta):
            raise NumericError(f"delta^2 - 4 Delta = {disc:.3e} < 0: inconsistent covariance matrix")
        disc = 0.0
    root = np.sqrt(disc)
    lo = 0.5 * (delta - root)
    if lo < 0.0:
        raise NumericError(f"negative squared symplectic eigenvalue {lo:.3e}")
    return float(np.sqrt(0.5 * (delta + root))), float(np.sqrt(lo))


def ptranspose_symplectic_eigs(blocks):
    """Symplectic eigenvalues of the partially transposed two-mode CM."""
    return eigs_from_invariants(*symplectic_invariants(blocks))


def log_negativity_from_mu2(mu2):
    return float(max(0.0, -np.log2(mu2)))


def log_negativity(gamma_ab):
    """Logarithmic negativity in e-bits of a physical two-mode CM."""
    g = require_physical(gamma_ab, "two-mode covariance matrix")
    if g.shape != (4, 4):
        raise DimensionError(f"two-mode CM must be 4x4, got {g.shape}")
    _, mu2 = ptranspose_symplectic_eigs(g)
    return log_negativity_from_mu2(mu2)


def is_symplectic(S, tol=1e-10):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        return False
    om = symplectic_form(S.shape[0] // 2)
    return bool(np.max(np.abs(S @ om @ S.T - om)) <= tol * max(1.0, np.max(np.abs(S)) ** 2))


def apply_symplectic(gamma, S):
    """Return ``S gamma S^T``; ``S`` must satisfy ``S Omega S^T = Omega``."""
    g = as_cm(gamma)
    S = np.asarray(S, dtype=np.float64)
    if S.shape != g.shape:
        raise DimensionError(f"symplectic matrix shape {S.shape} does not match CM {g.shape}")
    if not is_symplectic(S):
        raise ValueError("matrix is not symplectic (S Omega S^T != Omega)")
    out = S @ g @ S.T
    return 0.5 * (out + out.T)


def rotation(theta):
    """Phase rotation ``U(theta) = [[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(r):
    """``V(r) = diag(e^{2r}, e^{-2r})``."""
    return np.diag([np.exp(2.0 * r), np.exp(-2.0 * r)])


def local_symplectic(n_modes, mode, S2):
    """Embed a 2x2 single-mode symplectic ``S2`` acting on ``mode``."""
    S = np.eye(2 * n_modes)
    S[mode_slice(mode), mode_slice(mode)] = S2
    return S


def beam_splitter_matrix(theta, i, j, n_modes):
    """Symplectic matrix of the beam splitter ``a_i -> a_i cos + a_j sin``, ``a_j -> a_i sin - a_j cos``.

    The same real mixing acts on x and p, so the result is symplectic for any
    ``theta`` even though the 2x2 mixing is a reflection.
    """
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    for m in (i, j):
        if not 0 <= m < n_modes:
            raise DimensionError(f"mode {m} out of range for {n_modes} modes")
    c, s = np.cos(theta), np.sin(theta)
    S = np.eye(2 * n_modes)
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        S[a, a], S[a, b] = c, s
        S[b, a], S[b, b] = s, -c
    return S


def det_sum_2x2(P, Q):
    """``det P + det Q + Tr[P J Q^T J^T]``, which equals ``det(P + Q)`` for 2x2 matrices."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if P.shape != (2, 2) or Q.shape != (2, 2):
        raise DimensionError("det_sum_2x2 takes two 2x2 matrices")
    return float(_det2(P) + _det2(Q) + np.trace(P @ J2 @ Q.T @ J2.T))
