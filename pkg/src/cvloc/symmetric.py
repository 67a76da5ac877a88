"""Closed-form localizable entanglement of fully symmetric and bisymmetric states.

Mode layout: A = 0, B = 1, C_1..C_{N-2} = 2..N-1.  The single-mode blocks
are in the diagonal standard form (``beta = b * I``, ``eps = diag(eps1, eps2)``);
general blocks must be brought to this form by local symplectics first.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionError, NumericError, ShapeError, UnphysicalStateError
from .gaussian import beam_splitter_matrix, log_negativity_from_mu2, select_modes, validate_cm


@dataclass(frozen=True)
class SymmetricStateParams:
    n_modes: int
    b: float
    eps1: float
    eps2: float

    def __post_init__(self):
        if self.n_modes < 3:
            raise DimensionError(f"symmetric states need N >= 3 modes, got {self.n_modes}")

    @property
    def beta(self):
        return self.b * np.eye(2)

    @property
    def eps(self):
        return np.diag([self.eps1, self.eps2])


@dataclass(frozen=True)
class BisymmetricStateParams:
    n_modes: int
    b: float
    eps1: float
    eps2: float
    alpha: float
    xi1: float
    xi2: float
    tau: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        if self.n_modes < 3:
            raise DimensionError(f"bisymmetric states need N >= 3 modes, got {self.n_modes}")
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=np.float64).reshape(2, 2))

    @classmethod
    def from_symmetric(cls, p):
        return cls(p.n_modes, p.b, p.eps1, p.eps2, p.b, p.eps1, p.eps2, p.eps.copy())

    @property
    def beta(self):
        return self.b * np.eye(2)

    @property
    def eps(self):
        return np.diag([self.eps1, self.eps2])

    @property
    def alpha_block(self):
        return self.alpha * np.eye(2)

    @property
    def xi(self):
        return np.diag([self.xi1, self.xi2])


def _check_physical(g, what):
    report = validate_cm(g)
    if not report.physical:
        raise UnphysicalStateError(
            f"{what} is unphysical: smallest symplectic eigenvalue "
            f"{report.min_symplectic_eigenvalue:.12g} < 1",
            witness=report.min_symplectic_eigenvalue,
        )
    return g


def build_symmetric_cm(p):
    """``2N x 2N`` CM with ``beta`` on every diagonal block and ``eps`` on every off-diagonal one."""
    n = p.n_modes
    g = np.kron(np.eye(n), p.beta - p.eps) + np.kron(np.ones((n, n)), p.eps)
    return _check_physical(g, "symmetric state")


def build_bisymmetric_cm(p):
    n = p.n_modes
    nc = n - 2
    g = np.zeros((2 * n, 2 * n))
    g[:4, :4] = np.kron(np.eye(2), p.beta - p.eps) + np.kron(np.ones((2, 2)), p.eps)
    g[4:, 4:] = np.kron(np.eye(nc), p.alpha_block - p.xi) + np.kron(np.ones((nc, nc)), p.xi)
    g[:4, 4:] = np.kron(np.ones((2, nc)), p.tau)
    g[4:, :4] = g[:4, 4:].T
    return _check_physical(g, "bisymmetric state")


def _lambda_terms(p):
    n, b = p.n_modes, p.b
    terms = []
    for e in (p.eps1, p.eps2):
        den = b + (n - 3) * e
        if den <= 0.0:
            raise ValueError(f"b + (N-3) eps = {den:.6g} <= 0; parameters are unphysical")
        terms.append(2.0 * e / den)
    return terms


def lambda_min(p):
    """Smallest reachable eigenvalue ``1 + min_j 2 eps_j / (b + (N-3) eps_j)``."""
    return 1.0 + min(_lambda_terms(p))


@dataclass(frozen=True)
class SymmetricLocalization:
    mu2: float
    e_lg: float
    quadrature: str
    lambda_min: float


def symmetric_localizable(p):
    """Optimal localizable entanglement between A and B of a fully symmetric state.

    ``mu2^2 = det(beta - eps) * lambda_min``.  The optimum is homodyne
    detection on every C mode: of p when the minimum comes from ``eps2``
    (the p-p correlation), of x otherwise.
    """
    terms = _lambda_terms(p)
    lam = 1.0 + min(terms)
    mu2_sq = (p.b - p.eps1) * (p.b - p.eps2) * lam
    if mu2_sq <= 0.0:
        raise NumericError(f"mu2^2 = {mu2_sq:.6g} <= 0; parameters are unphysical")
    mu2 = float(np.sqrt(mu2_sq))
    quad = "p" if terms[1] <= terms[0] else "x"
    return SymmetricLocalization(mu2, log_negativity_from_mu2(mu2), quad, lam)


def mu2_squared_rearranged(p):
    """``(b - e_m)(b + (N-1) e_m)/(b + (N-3) e_m) * (b - e_o)`` with ``e_m`` the minimising correlation."""
    terms = _lambda_terms(p)
    em, eo = (p.eps2, p.eps1) if terms[1] <= terms[0] else (p.eps1, p.eps2)
    n, b = p.n_modes, p.b
    return (b - em) * (b + (n - 1) * em) / (b + (n - 3) * em) * (b - eo)


def splitter_network(n_modes):
    """Symplectic of the balanced A-B splitter followed by the C-side array.

    The C array is applied starting with ``B_{C1 C_{N-2}}(asin 1/sqrt 2)`` and
    ending with ``B_{C1 C2}(asin 1/sqrt(N-2))``, which leaves C1 carrying the
    symmetric combination of all C modes.
    """
    S = beam_splitter_matrix(np.pi / 4, 0, 1, n_modes)
    nc = n_modes - 2
    # step j folds C_{N-2-j} into C1, which then carries j + 2 modes with equal weight
    for j, k in enumerate(range(nc - 1, 0, -1)):
        theta = np.arcsin(1.0 / np.sqrt(j + 2))
        S = beam_splitter_matrix(theta, 2, 2 + k, n_modes) @ S
    return S


@dataclass
class BlockReport:
    """Result of :func:`bs_network_reduce`.

    ``decoupled`` lists the 2x2 blocks of B, C_2, ..., C_{N-2} in that order.
    """

    ac1: np.ndarray
    decoupled: list
    transformed: np.ndarray
    residual_coupling: float
    max_block_error: float


def bs_network_reduce(gamma, tol=1e-8):
    """Apply the splitter network and split the result into the A-C1 block and decoupled modes.

    The expected blocks are read off ``gamma`` itself (``beta``, ``eps``,
    ``tau``, ``alpha``, ``xi``), so the same routine covers symmetric and
    bisymmetric inputs.  Raises :class:`ShapeError` if couplings outside the
    A-C1 block exceed ``tol``.
    """
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0] // 2
    if n < 3:
        raise DimensionError("need at least three modes")
    S = splitter_network(n)
    t = S @ g @ S.T
    t = 0.5 * (t + t.T)

    mask = np.ones((n, n), dtype=bool)
    np.fill_diagonal(mask, False)
    mask[0, 2] = mask[2, 0] = False
    blocks = t.reshape(n, 2, n, 2).transpose(0, 2, 1, 3)
    residual = float(np.max(np.abs(blocks[mask]))) if mask.any() else 0.0
    if residual > tol * max(1.0, float(np.max(np.abs(g)))):
        raise ShapeError(f"input is not (bi)symmetric: residual coupling {residual:.3e}")

    beta, eps, tau = g[0:2, 0:2], g[0:2, 2:4], g[0:2, 4:6]
    alpha = g[4:6, 4:6]
    xi = g[4:6, 6:8] if n > 3 else np.zeros((2, 2))
    expected_ac1 = np.block(
        [
            [beta + eps, np.sqrt(2.0 * (n - 2)) * tau],
            [np.sqrt(2.0 * (n - 2)) * tau.T, alpha + (n - 3) * xi],
        ]
    )
    ac1 = select_modes(t, [0, 2])
    decoupled = [select_modes(t, [1])] + [select_modes(t, [k]) for k in range(3, n)]
    expected = [beta - eps] + [alpha - xi] * (n - 3)
    err = float(np.max(np.abs(ac1 - expected_ac1)))
    for got, want in zip(decoupled, expected):
        err = max(err, float(np.max(np.abs(got - want))))
    if err > tol * max(1.0, float(np.max(np.abs(g)))):
        raise ShapeError(f"reduced blocks deviate from the (bi)symmetric form by {err:.3e}")
    return BlockReport(ac1, decoupled, t, residual, err)


def _d_matrix(p, lam):
    n = p.n_modes
    bracket = p.beta + p.eps - lam * (p.beta - p.eps)
    return p.alpha_block + (n - 3) * p.xi - 2.0 * (n - 2) * p.tau.T @ np.linalg.solve(bracket, p.tau)


@dataclass(frozen=True)
class BisymmetricLocalization:
    mu2: float
    e_lg: float
    lambda_min: float


def bisymmetric_localizable(p, xtol=1e-12):
    """Optimal localizable entanglement between A and B of a bisymmetric state.

    ``lambda_min`` is the smallest ``lambda >= 0`` at which the smallest
    eigenvalue of ``D(lambda) = alpha + (N-3) xi - 2(N-2) tau^T [beta + eps -
    lambda (beta - eps)]^{-1} tau`` reaches zero.  ``D`` decreases
    monotonically up to ``lambda_upper``, where the bracket loses positivity;
    if it never reaches zero there (e.g. ``tau = 0``), ``lambda_min =
    lambda_upper`` and the C modes carry no useful correlations.
    """
    bme = p.beta - p.eps
    bpe = p.beta + p.eps
    if np.any(np.diag(bme) <= 0.0) or np.any(np.diag(bpe) <= 0.0):
        raise UnphysicalStateError("beta -/+ eps must be positive definite")
    # diagonal blocks: generalized eigenvalues of (beta + eps, beta - eps)
    lam_upper = float(np.min(np.diag(bpe) / np.diag(bme)))

    def h(lam):
        return float(np.linalg.eigvalsh(_d_matrix(p, lam))[0])

    h0 = h(0.0)
    if h0 <= 0.0:
        raise NumericError(f"D(0) is not positive definite (spectrum {np.linalg.eigvalsh(_d_matrix(p, 0.0))})")
    hi = lam_upper * (1.0 - 1e-13)
    if h(hi) > 0.0:
        lam = lam_upper
    else:
        lam = brentq(h, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    mu2_sq = float(np.linalg.det(bme)) * lam
    mu2 = float(np.sqrt(mu2_sq))
    return BisymmetricLocalization(mu2, log_negativity_from_mu2(mu2), float(lam))


# ---------------------------------------------------------------------------
# structure detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Detection:
    """Outcome of a structure detector: ``params`` on success, else ``reason``."""

    params: object
    reason: str = ""
    transform: np.ndarray = None  # local symplectic applied to each C mode

    def __bool__(self):
        return self.params is not None


def _standardizer(beta, eps):
    """Symplectic ``S`` with ``S beta S^T = b I`` and ``S eps S^T`` diagonal."""
    w, v = np.linalg.eigh(beta)
    if w[0] <= 0.0:
        return None
    det = w[0] * w[1]
    S = det**0.25 * (v / np.sqrt(w)) @ v.T
    e = S @ eps @ S.T
    e = 0.5 * (e + e.T)
    _, u = np.linalg.eigh(e)
    if abs(u[0, 0]) < abs(u[0, 1]):
        u = u[:, ::-1].copy()
    if np.linalg.det(u) < 0.0:
        u[:, 0] = -u[:, 0]
    return u.T @ S


def _blocks_equal(blocks, tol):
    ref = blocks[0]
    return all(np.max(np.abs(b - ref)) <= tol for b in blocks[1:])


def _block(g, i, j):
    return g[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]


def detect_symmetric(gamma, tol=1e-9):
    """Fully symmetric parameters of ``gamma`` after a common local standardization."""
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0] // 2
    if n < 3:
        return Detection(None, f"needs at least 3 modes, got {n}")
    scale = tol * max(1.0, float(np.max(np.abs(g))))
    diag = [_block(g, i, i) for i in range(n)]
    off = [_block(g, i, j) for i in range(n) for j in range(n) if i != j]
    if not _blocks_equal(diag, scale):
        return Detection(None, "diagonal blocks differ between modes")
    if not _blocks_equal(off, scale):
        return Detection(None, "off-diagonal blocks differ between mode pairs")
    S = _standardizer(diag[0], off[0])
    if S is None:
        return Detection(None, "diagonal block is not positive definite")
    b = S @ diag[0] @ S.T
    e = S @ off[0] @ S.T
    return Detection(SymmetricStateParams(n, float(0.5 * (b[0, 0] + b[1, 1])), float(e[0, 0]), float(e[1, 1])), "", S)


def detect_bisymmetric(gamma, tol=1e-9):
    """Bisymmetric parameters (A, B exchangeable; C modes exchangeable) after local standardization."""
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0] // 2
    if n < 3:
        return Detection(None, f"needs at least 3 modes, got {n}")
    scale = tol * max(1.0, float(np.max(np.abs(g))))
    cs = range(2, n)
    if not _blocks_equal([_block(g, 0, 0), _block(g, 1, 1)], scale):
        return Detection(None, "A and B diagonal blocks differ")
    if np.max(np.abs(_block(g, 0, 1) - _block(g, 1, 0))) > scale:
        return Detection(None, "A-B correlation block is not exchange symmetric")
    if not _blocks_equal([_block(g, i, i) for i in cs], scale):
        return Detection(None, "C-mode diagonal blocks differ")
    xis = [_block(g, i, j) for i in cs for j in cs if i != j]
    if xis and not _blocks_equal(xis, scale):
        return Detection(None, "C-C correlation blocks differ")
    if not _blocks_equal([_block(g, a, i) for a in (0, 1) for i in cs], scale):
        return Detection(None, "A-C and B-C correlation blocks differ")
    S_ab = _standardizer(_block(g, 0, 0), _block(g, 0, 1))
    xi0 = xis[0] if xis else np.zeros((2, 2))
    S_c = _standardizer(_block(g, 2, 2), xi0)
    if S_ab is None or S_c is None:
        return Detection(None, "diagonal block is not positive definite")
    b = S_ab @ _block(g, 0, 0) @ S_ab.T
    e = S_ab @ _block(g, 0, 1) @ S_ab.T
    a = S_c @ _block(g, 2, 2) @ S_c.T
    x = S_c @ xi0 @ S_c.T
    tau = S_ab @ _block(g, 0, 2) @ S_c.T
    return Detection(
        BisymmetricStateParams(
            n,
            float(0.5 * (b[0, 0] + b[1, 1])),
            float(e[0, 0]),
            float(e[1, 1]),
            float(0.5 * (a[0, 0] + a[1, 1])),
            float(x[0, 0]),
            float(x[1, 1]),
            tau,
        ),
        "",
        S_c,
    )
