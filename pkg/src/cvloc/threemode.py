"""Optimal Gaussian measurement on mode C of a three-mode state.

Modes are ordered A, B, C.  Mode C is first brought to the standard form
``C = c * I`` (see :func:`cvloc.measurement.standardize_measured_mode`); all
closed forms below assume it.

The objective is ``f = 2 mu2^2 = delta - sqrt(delta^2 - 4 Delta)`` where
``delta`` and ``Delta`` are the symplectic invariants of the conditional A-B
state, written in closed form in the measurement squeezing ``r`` and phase
``theta``.  Internally the squeezing is parameterised by ``y = tanh r`` so that
``y = 1`` is homodyne detection and ``y = 0`` projection onto a coherent state.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericError, UnsupportedShapeError
from .gaussian import (
    J2,
    eigs_from_invariants,
    log_negativity_from_mu2,
    require_physical,
    rotation,
    symplectic_eigenvalues,
    symplectic_form,
)
from .measurement import standardize_measured_mode
from .polyroots import real_roots

GRID_Y = 64
GRID_THETA = 64
Y_MAX_INTERIOR = 1.0 - 1e-12
TIE_TOL = 1e-9
REFINE_STARTS = 4
ISOTROPY_TOL = 1e-8

# candidate classes in reporting preference when values tie
_PREFERENCE = ("homodyne", "coherent", "interior")


def _det2(m):
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(frozen=True)
class ThreeModeState:
    """Standardized three-mode state (C block equal to ``c * I``)."""

    gamma: np.ndarray
    c: float
    original: np.ndarray = field(repr=False)

    @classmethod
    def from_cm(cls, gamma, validate=True):
        g = np.asarray(gamma, dtype=np.float64)
        if g.shape != (6, 6):
            from .errors import DimensionError

            raise DimensionError(f"three-mode CM must be 6x6, got {g.shape}")
        if validate:
            g = require_physical(g, "three-mode covariance matrix")
        std, c = standardize_measured_mode(g, 2)
        return cls(std, c, g)

    @property
    def A(self):
        return self.gamma[0:2, 0:2]

    @property
    def B(self):
        return self.gamma[2:4, 2:4]

    @property
    def D(self):
        return self.gamma[0:2, 2:4]

    @property
    def E(self):
        return self.gamma[0:2, 4:6]

    @property
    def F(self):
        return self.gamma[2:4, 4:6]

    @property
    def I(self):  # noqa: E743
        """``det A + det B - 2 det D``, the measurement-independent part of ``delta``."""
        return _det2(self.A) + _det2(self.B) - 2.0 * _det2(self.D)

    @property
    def det_gamma(self):
        return float(np.linalg.det(self.gamma))

    @property
    def reduced_ab(self):
        return self.gamma[:4, :4].copy()


@dataclass(frozen=True)
class ChiMatrix:
    chi: np.ndarray

    @property
    def chi1(self):
        return float(self.chi[0, 1] + self.chi[1, 0])

    @property
    def chi2(self):
        return float(self.chi[1, 1] - self.chi[0, 0])

    @property
    def norm(self):
        return math.hypot(self.chi1, self.chi2)

    @property
    def trace(self):
        return float(np.trace(self.chi))


@dataclass(frozen=True)
class GammaCBlock:
    """C block of the inverse covariance matrix."""

    gamma_c: np.ndarray

    @property
    def g1(self):
        return float(self.gamma_c[0, 1] + self.gamma_c[1, 0])

    @property
    def g2(self):
        return float(self.gamma_c[1, 1] - self.gamma_c[0, 0])


def chi_matrix(s):
    """``chi = 2 E^T J^T D J F - E^T J^T A J E - F^T J^T B J F``."""
    Jt = J2.T
    E, F = s.E, s.F
    chi = 2.0 * E.T @ Jt @ s.D @ J2 @ F - E.T @ Jt @ s.A @ J2 @ E - F.T @ Jt @ s.B @ J2 @ F
    return ChiMatrix(chi)


def gamma_c_block(s):
    inv = np.linalg.inv(s.gamma)
    gc = inv[4:6, 4:6]
    return GammaCBlock(0.5 * (gc + gc.T))


def _check_standardized(s):
    if not isinstance(s, ThreeModeState):
        raise TypeError("expected a ThreeModeState; build one with ThreeModeState.from_cm")


def invariant_delta(s, x, r, theta):
    """Closed-form ``delta`` of the A-B state after projecting C onto ``U V(r) U^T``."""
    _check_standardized(s)
    c = s.c
    dEF = _det2(s.E) - _det2(s.F)
    ch, sh = math.cosh(2.0 * r), math.sinh(2.0 * r)
    num = dEF**2 + (c + ch) * x.trace + sh * (x.chi1 * math.sin(2 * theta) + x.chi2 * math.cos(2 * theta))
    return s.I + num / (1.0 + c * c + 2.0 * c * ch)


def invariant_Delta(s, g, r, theta):
    """Closed-form ``Delta = det gamma_AB`` after projecting C onto ``U V(r) U^T``."""
    _check_standardized(s)
    c = s.c
    gc = g.gamma_c
    ch, sh = math.cosh(2.0 * r), math.sinh(2.0 * r)
    num = 1.0 + _det2(gc) + ch * np.trace(gc) - sh * (g.g1 * math.sin(2 * theta) + g.g2 * math.cos(2 * theta))
    return float(s.det_gamma * num / (1.0 + c * c + 2.0 * c * ch))


def homodyne_invariants(s, x, g, theta):
    """``(delta, Delta)`` in the homodyne limit: ``I + chi22(theta)/c`` and ``det(gamma) Gamma_C11(theta)/c``."""
    U = rotation(theta)
    chi_t = U.T @ x.chi @ U
    gc_t = U.T @ g.gamma_c @ U
    return s.I + chi_t[1, 1] / s.c, s.det_gamma * gc_t[0, 0] / s.c


def kernel_consts(s, x=None, g=None):
    x = chi_matrix(s) if x is None else x
    g = gamma_c_block(s) if g is None else g
    dEF2 = (_det2(s.E) - _det2(s.F)) ** 2
    return (
        s.I,
        dEF2,
        x.trace,
        x.chi1,
        x.chi2,
        s.c,
        s.det_gamma,
        _det2(g.gamma_c),
        float(np.trace(g.gamma_c)),
        g.g1,
        g.g2,
    )


def _f_point(consts, y, theta):
    return _kernels._threemode_point(consts, y, theta)


def objective_f(s, r, theta):
    """``f = delta - sqrt(delta^2 - 4 Delta) = 2 mu2^2``; ``r = inf`` gives homodyne."""
    _check_standardized(s)
    x, g = chi_matrix(s), gamma_c_block(s)
    if math.isinf(r):
        delta, Delta = homodyne_invariants(s, x, g, theta)
    else:
        delta, Delta = invariant_delta(s, x, r, theta), invariant_Delta(s, g, r, theta)
    disc = delta * delta - 4.0 * Delta
    if disc < -1e-9 * max(1.0, delta * delta):
        raise NumericError(f"delta^2 - 4 Delta = {disc:.3e} < 0")
    return float(delta - math.sqrt(max(disc, 0.0)))


def mu2_from_f(f):
    return math.sqrt(max(f, 0.0) / 2.0)


@dataclass(frozen=True)
class LocalizationResult:
    """Optimal measurement: squeezing ``r`` (``inf`` = homodyne), phase ``theta``."""

    r: float
    theta: float
    mu2: float
    e_lg: float
    strategy: str
    f: float

    @property
    def y(self):
        return 1.0 if math.isinf(self.r) else math.tanh(self.r)


def _result(y, theta, f, strategy):
    mu2 = mu2_from_f(f)
    if strategy == "homodyne":
        r = math.inf
    elif strategy == "coherent":
        r, theta = 0.0, 0.0
    else:
        r = math.atanh(y)
    return LocalizationResult(r, float(theta % math.pi), mu2, log_negativity_from_mu2(mu2), strategy, float(f))


def _pick(candidates):
    """``candidates``: dict strategy -> (f, y, theta).  Lowest f wins; ties go by preference."""
    best = min(v[0] for v in candidates.values())
    for name in _PREFERENCE:
        if name in candidates and candidates[name][0] <= best + TIE_TOL:
            f, y, th = candidates[name]
            return _result(y, th, f, name)
    raise AssertionError("no candidate")  # pragma: no cover


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(fun, lo, hi, xtol=1e-10):
    """Golden-section search for a minimum of ``fun`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    fx = fun(x)
    for xe in (lo, hi):
        fe = fun(xe)
        if fe < fx:
            x, fx = xe, fe
    return x, fx


def _refine(consts, y0, th0, hy, hth, ftol=1e-13, max_sweeps=200):
    """Coordinate-wise golden-section refinement of f around a grid point."""
    y, th = y0, th0
    f = _f_point(consts, y, th)
    for _ in range(max_sweeps):
        f_prev = f
        lo, hi = max(0.0, y - hy), min(Y_MAX_INTERIOR, y + hy)
        y, f = golden_min(lambda v: _f_point(consts, v, th), lo, hi)
        th, f = golden_min(lambda t: _f_point(consts, y, t), th - hth, th + hth)
        if abs(f_prev - f) <= ftol:
            break
    return y, th % math.pi, f


def _grid_starts(F, ys, ths, k):
    """Indices of the ``k`` best grid local minima, deterministic (f, y, theta) order."""
    ny, nt = F.shape
    loc = np.ones_like(F, dtype=bool)
    for dy in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if dy == 0 and dt == 0:
                continue
            shifted = np.roll(F, (-dy, -dt), axis=(0, 1))
            # y is not periodic: neighbours past the edge do not count
            if dy == 1:
                shifted[-1, :] = np.inf
            elif dy == -1:
                shifted[0, :] = np.inf
            loc &= F <= shifted
    iy, it = np.nonzero(loc)
    vals = F[iy, it]
    order = np.lexsort((ths[it], ys[iy], vals))
    return [(int(iy[o]), int(it[o])) for o in order[:k]]


def optimize_gaussian(s):
    """Globally minimise ``f`` over all pure Gaussian measurements on mode C.

    Coarse (y, theta) grid, golden-section refinement from the best grid local
    minima, plus the two boundary classes: coherent projection (y = 0) and
    homodyne detection (y = 1, theta refined separately).
    """
    if not isinstance(s, ThreeModeState):
        s = ThreeModeState.from_cm(s)
    consts = kernel_consts(s)
    ys = np.arange(GRID_Y) / GRID_Y
    ths = np.arange(GRID_THETA) * (math.pi / GRID_THETA)
    F = _kernels.threemode_f_grid(consts, ys, ths)
    hy, hth = 1.0 / GRID_Y, math.pi / GRID_THETA

    best_int = None
    for iy, it in _grid_starts(F, ys, ths, REFINE_STARTS):
        cand = _refine(consts, ys[iy], ths[it], hy, hth)
        if best_int is None or (cand[2], cand[0], cand[1]) < (best_int[2], best_int[0], best_int[1]):
            best_int = cand

    Fh = _kernels.threemode_f_grid(consts, np.array([1.0]), ths)[0]
    best_h = None
    for it in np.argsort(Fh, kind="stable")[:REFINE_STARTS]:
        th, fh = golden_min(lambda t: _f_point(consts, 1.0, t), ths[it] - hth, ths[it] + hth)
        if best_h is None or (fh, th % math.pi) < (best_h[0], best_h[2]):
            best_h = (fh, 1.0, th % math.pi)

    f0 = _f_point(consts, 0.0, 0.0)
    cands = {
        "homodyne": best_h,
        "coherent": (f0, 0.0, 0.0),
        "interior": (best_int[2], best_int[0], best_int[1]),
    }
    return _pick(cands)


@dataclass(frozen=True)
class QuarticCoefficients:
    """Coefficients ``c0..c4`` (ascending) plus the intermediate quantities used."""

    coeffs: np.ndarray
    intermediates: dict

    def __iter__(self):
        return iter(self.coeffs)


def homodyne_quartic_coeffs(s, x=None, g=None):
    """Coefficients ``h0..h4`` of the optimal-homodyne-phase quartic in ``x = tan(theta)``."""
    x = chi_matrix(s) if x is None else x
    g = gamma_c_block(s) if g is None else g
    c, dg, I = s.c, s.det_gamma, s.I
    chi, gc = x.chi, g.gamma_c
    x1, x2 = x.chi1, x.chi2
    g1, g2 = g.g1, g.g2
    u = chi[0, 0] + c * I
    v = chi[1, 1] + c * I
    G11, G22 = gc[0, 0], gc[1, 1]
    h4 = G22 * x1**2 + x1 * g1 * u + c * g1**2 * dg
    h3 = 2 * x1 * g2 * u + 2 * x2 * g1 * u + 4 * G22 * x1 * x2 + 4 * c * g1 * g2 * dg
    h2 = (
        4 * G22 * x2**2
        - x1**2 * (G11 + G22)
        + 4 * x2 * g2 * u
        - x1 * g1 * (u + v)
        + 2 * c * (2 * g2**2 - g1**2) * dg
    )
    h1 = -4 * G11 * x1 * x2 - 2 * v * (x2 * g1 + x1 * g2) - 4 * c * g1 * g2 * dg
    h0 = G11 * x1**2 + x1 * g1 * v + c * g1**2 * dg
    return QuarticCoefficients(np.array([h0, h1, h2, h3, h4]), {"u": u, "v": v, "I": I})


def _homodyne_scale(s, g, u, v):
    """Natural size of the h-coefficients, built from the state rather than from chi and g."""
    chi_nat = float(np.max(np.abs(s.gamma))) ** 3
    gam_nat = float(np.trace(g.gamma_c))
    return gam_nat * chi_nat**2 + chi_nat * gam_nat * (abs(u) + abs(v)) + s.c * gam_nat**2 * abs(s.det_gamma)


@dataclass(frozen=True)
class HomodyneResult:
    theta: float
    mu2: float
    e_hom: float
    degenerate: bool
    f: float


def optimal_homodyne(s):
    """Best homodyne phase on mode C from the real roots of the h-quartic plus ``theta = pi/2``."""
    if not isinstance(s, ThreeModeState):
        s = ThreeModeState.from_cm(s)
    x, g = chi_matrix(s), gamma_c_block(s)
    q = homodyne_quartic_coeffs(s, x, g)
    scale = _homodyne_scale(s, g, q.intermediates["u"], q.intermediates["v"])

    def fhom(theta):
        delta, Delta = homodyne_invariants(s, x, g, theta)
        mu1, mu2 = eigs_from_invariants(delta, Delta)
        return 2.0 * mu2 * mu2

    if np.max(np.abs(q.coeffs)) <= 1e-12 * scale:
        f = fhom(0.0)
        mu2 = mu2_from_f(f)
        return HomodyneResult(0.0, mu2, log_negativity_from_mu2(mu2), True, f)

    thetas = [math.atan(t) % math.pi for t in real_roots(q.coeffs)] + [math.pi / 2]
    vals = [(fhom(t), t) for t in thetas]
    f, theta = min(vals)
    mu2 = mu2_from_f(f)
    return HomodyneResult(theta, mu2, log_negativity_from_mu2(mu2), False, f)


@dataclass(frozen=True)
class IsotropyReport:
    is_isotropic: bool
    nu: float
    gamma_p: np.ndarray


def isotropic_check(gamma):
    """Detect ``gamma = nu * gamma_p`` with ``gamma_p`` pure."""
    g = np.asarray(gamma, dtype=np.float64)
    nus = symplectic_eigenvalues(g)
    nu = float(np.mean(nus))
    gp = g / nu
    if np.max(np.abs(nus - nu)) > ISOTROPY_TOL * max(1.0, nu):
        return IsotropyReport(False, nu, gp)
    om = symplectic_form(g.shape[0] // 2)
    sq = om @ gp
    sq = sq @ sq
    err = float(np.max(np.abs(sq + np.eye(g.shape[0]))))
    ok = err <= ISOTROPY_TOL * max(1.0, float(np.max(np.abs(gp))) ** 2)
    return IsotropyReport(ok, nu, gp)


def isotropic_quartic_coeffs(s, x, nu):
    """Coefficients ``q0..q4`` of the optimal-squeezing quartic in ``y = tanh r``."""
    c, I, nc = s.c, s.I, x.norm
    dEF2 = (_det2(s.E) - _det2(s.F)) ** 2
    tr = x.trace
    a_p = nu**2 * (nu**2 + c) ** 2
    a_m = -(nu**2) * (nu**2 - c) ** 2
    b_p = (1 + c) ** 2
    b_m = -((1 - c) ** 2)
    d_p = (1 + c) ** 2 * I + dEF2 + (1 + c) * tr
    d_m = -((1 - c) ** 2) * I - dEF2 + (1 - c) * tr
    q4 = nc**2 * b_m * a_m
    q3 = nc * (2 * a_m * b_m * d_p - (a_p * b_m + a_m * b_p) * d_m)
    q2 = (a_m * b_p - a_p * b_m) ** 2 - nc**2 * (a_m * b_p + a_p * b_m) + (d_m * a_p - d_p * a_m) * (
        d_m * b_p - d_p * b_m
    )
    q1 = nc * (2 * a_p * b_p * d_m - (a_p * b_m + a_m * b_p) * d_p)
    q0 = nc**2 * b_p * a_p
    inter = {"a+": a_p, "a-": a_m, "b+": b_p, "b-": b_m, "d+": d_p, "d-": d_m}
    return QuarticCoefficients(np.array([q0, q1, q2, q3, q4]), inter)


def _isotropic_f(s, x, nu, y, theta):
    c = s.c
    gc = c / nu**2
    consts = (s.I, (_det2(s.E) - _det2(s.F)) ** 2, x.trace, x.chi1, x.chi2, c, nu**6, gc * gc, 2 * gc, 0.0, 0.0)
    return _f_point(consts, y, theta)


def isotropic_homodyne_f(s, x, nu):
    """``f`` of the best homodyne for an isotropic state: ``delta = I + (Tr chi + |chi|)/(2c)``, ``Delta = nu^4``."""
    delta = s.I + (x.trace + x.norm) / (2.0 * s.c)
    disc = max(delta * delta - 4.0 * nu**4, 0.0)
    return delta - math.sqrt(disc)


@dataclass(frozen=True)
class IsotropicResult(LocalizationResult):
    degenerate: bool = False


def isotropic_optimal(s, nu=None):
    """Analytic optimum for an isotropic state.

    Phase from ``sin 2theta = chi1/|chi|``, ``cos 2theta = chi2/|chi|``;
    squeezing among the real roots in ``[0, 1)`` of the q-quartic, the coherent
    projection ``y = 0`` and homodyne ``y = 1``.  When ``|chi| = 0`` the phase is
    irrelevant and set to 0.
    """
    if not isinstance(s, ThreeModeState):
        s = ThreeModeState.from_cm(s)
    if nu is None:
        rep = isotropic_check(s.gamma)
        if not rep.is_isotropic:
            raise UnsupportedShapeError("state is not isotropic (symplectic eigenvalues differ)")
        nu = rep.nu
    x = chi_matrix(s)
    scale = max(1.0, float(np.max(np.abs(s.gamma)))) ** 2
    degenerate = x.norm <= 1e-12 * scale
    theta = 0.0 if degenerate else (0.5 * math.atan2(x.chi1, x.chi2)) % math.pi

    q = isotropic_quartic_coeffs(s, x, nu)
    roots = [y for y in real_roots(q.coeffs) if 0.0 < y < 1.0]
    interior = None
    for y in roots:
        f = _isotropic_f(s, x, nu, y, theta)
        if interior is None or (f, y) < (interior[0], interior[1]):
            interior = (f, y, theta)
    cands = {
        "homodyne": (isotropic_homodyne_f(s, x, nu), 1.0, theta),
        "coherent": (_isotropic_f(s, x, nu, 0.0, theta), 0.0, 0.0),
    }
    if interior is not None:
        cands["interior"] = interior
    res = _pick(cands)
    return IsotropicResult(res.r, res.theta, res.mu2, res.e_lg, res.strategy, res.f, degenerate)
