"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``CVLOC_DISABLE_NUMBA`` is unset
(or ``0``/``false``).  Both paths are always importable under their suffixed
names (``*_nb``, ``*_np``) so tests and ``benchmarks/bench_kernels.py`` can
compare them directly.

Measurement parameters enter the kernels as ``s = exp(-2 r)`` in ``[0, 1]``
rather than ``r``; ``s = 0`` is the exact homodyne limit, so grids can mix
finite squeezing and homodyne points without a large-r surrogate.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("CVLOC_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = numba is not None and _flag in ("", "0", "false", "no")

_CHUNK = 20000


def _njit(fn):
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# three-mode objective f = 2 mu2^2 from the closed-form invariants
# ---------------------------------------------------------------------------
#
# consts = (I, dEF2, tr_chi, chi1, chi2, c, det_g, det_GC, tr_GC, g1, g2)
# The invariants are written in y = tanh r with numerator and denominator
# multiplied by (1 - y^2), which keeps them finite at y = 1 (homodyne).


def _threemode_point(consts, y, theta):
    I, dEF2, trchi, chi1, chi2, c, detg, detGC, trGC, g1, g2 = consts
    om = 1.0 - y * y
    ch = 1.0 + y * y
    sh = 2.0 * y
    s2 = math.sin(2.0 * theta)
    c2 = math.cos(2.0 * theta)
    den = (1.0 + c * c) * om + 2.0 * c * ch
    delta = I + (dEF2 * om + (c * om + ch) * trchi + sh * (chi1 * s2 + chi2 * c2)) / den
    Delta = detg * ((1.0 + detGC) * om + ch * trGC - sh * (g1 * s2 + g2 * c2)) / den
    disc = delta * delta - 4.0 * Delta
    if disc < 0.0:
        disc = 0.0
    return delta - math.sqrt(disc)


_threemode_point_nb = _njit(_threemode_point)


@_njit
def _threemode_f_grid_nb_impl(consts, ys, thetas):
    out = np.empty((ys.shape[0], thetas.shape[0]))
    for i in range(ys.shape[0]):
        for j in range(thetas.shape[0]):
            out[i, j] = _threemode_point_nb(consts, ys[i], thetas[j])
    return out


def threemode_f_grid_nb(consts, ys, thetas):
    return _threemode_f_grid_nb_impl(
        tuple(float(v) for v in consts),
        np.ascontiguousarray(ys, dtype=np.float64),
        np.ascontiguousarray(thetas, dtype=np.float64),
    )


def threemode_f_grid_np(consts, ys, thetas):
    I, dEF2, trchi, chi1, chi2, c, detg, detGC, trGC, g1, g2 = (float(v) for v in consts)
    y = np.asarray(ys, dtype=np.float64)[:, None]
    th = np.asarray(thetas, dtype=np.float64)[None, :]
    om = 1.0 - y * y
    ch = 1.0 + y * y
    sh = 2.0 * y
    s2 = np.sin(2.0 * th)
    c2 = np.cos(2.0 * th)
    den = (1.0 + c * c) * om + 2.0 * c * ch
    delta = I + (dEF2 * om + (c * om + ch) * trchi + sh * (chi1 * s2 + chi2 * c2)) / den
    Delta = detg * ((1.0 + detGC) * om + ch * trGC - sh * (g1 * s2 + g2 * c2)) / den
    disc = np.maximum(delta * delta - 4.0 * Delta, 0.0)
    return delta - np.sqrt(disc)


# ---------------------------------------------------------------------------
# batched conditioning of a target pair on product measurements
# ---------------------------------------------------------------------------
#
# target: 4x4 block of the target pair, cross: 4 x 2k correlations with the
# k measured modes, gcc: 2k x 2k block of the measured modes.
# With m_j = U(theta_j) diag(1/s_j, s_j) U(theta_j)^T and Q = diag(sqrt s_j, 1):
#   (gcc + (+)m_j)^-1 = R Q [Q R^T gcc R Q + diag(1, s_j)]^-1 Q R^T
# which stays regular at s_j = 0.


@_njit
def _det4_inplace(a):
    # Gaussian elimination with partial pivoting; destroys a
    det = 1.0
    for c in range(4):
        piv = c
        big = abs(a[c, c])
        for r in range(c + 1, 4):
            if abs(a[r, c]) > big:
                big = abs(a[r, c])
                piv = r
        if big == 0.0:
            return 0.0
        if piv != c:
            for j in range(4):
                tmp = a[c, j]
                a[c, j] = a[piv, j]
                a[piv, j] = tmp
            det = -det
        det *= a[c, c]
        for r in range(c + 1, 4):
            f = a[r, c] / a[c, c]
            for j in range(c + 1, 4):
                a[r, j] -= f * a[c, j]
    return det


@_njit
def _mu2_from_4x4_nb(g):
    detA = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    detB = g[2, 2] * g[3, 3] - g[2, 3] * g[3, 2]
    detC = g[0, 2] * g[1, 3] - g[0, 3] * g[1, 2]
    delta = detA + detB - 2.0 * detC
    Delta = _det4_inplace(g)
    disc = delta * delta - 4.0 * Delta
    if disc < 0.0:
        disc = 0.0
    val = 0.5 * (delta - math.sqrt(disc))
    if val < 0.0:
        val = 0.0
    return math.sqrt(val)


@_njit
def _conditioned_mu2_nb_impl(target, cross, gcc, s, theta):
    # g = target - X M^-1 X^T with X = cross R Q, solved by Cholesky of M
    npts = s.shape[0]
    k = s.shape[1]
    m2 = 2 * k
    out = np.empty(npts)
    R = np.zeros((m2, m2))
    q = np.empty(m2)
    T = np.empty((m2, m2))
    M = np.empty((m2, m2))
    X = np.empty((4, m2))
    g = np.empty((4, 4))
    for p in range(npts):
        for j in range(k):
            ct = math.cos(theta[p, j])
            st = math.sin(theta[p, j])
            a = 2 * j
            R[a, a] = ct
            R[a, a + 1] = st
            R[a + 1, a] = -st
            R[a + 1, a + 1] = ct
            q[a] = math.sqrt(s[p, j])
            q[a + 1] = 1.0
        # T = gcc R (R is block diagonal: only the 2x2 blocks contribute)
        for i in range(m2):
            for j in range(k):
                a = 2 * j
                T[i, a] = gcc[i, a] * R[a, a] + gcc[i, a + 1] * R[a + 1, a]
                T[i, a + 1] = gcc[i, a] * R[a, a + 1] + gcc[i, a + 1] * R[a + 1, a + 1]
        for i in range(m2):
            bi = i - i % 2
            for j in range(m2):
                v = R[bi, i] * T[bi, j] + R[bi + 1, i] * T[bi + 1, j]
                M[i, j] = q[i] * v * q[j]
        for j in range(k):
            M[2 * j, 2 * j] += 1.0
            M[2 * j + 1, 2 * j + 1] += s[p, j]
        # X = cross R Q
        for i in range(4):
            for j in range(k):
                a = 2 * j
                X[i, a] = (cross[i, a] * R[a, a] + cross[i, a + 1] * R[a + 1, a]) * q[a]
                X[i, a + 1] = (cross[i, a] * R[a, a + 1] + cross[i, a + 1] * R[a + 1, a + 1]) * q[a + 1]
        # Cholesky M = L L^T in the lower triangle of M
        for j in range(m2):
            acc = M[j, j]
            for l in range(j):
                acc -= M[j, l] * M[j, l]
            d = math.sqrt(acc) if acc > 0.0 else 1e-300
            M[j, j] = d
            for i in range(j + 1, m2):
                acc = M[i, j]
                for l in range(j):
                    acc -= M[i, l] * M[j, l]
                M[i, j] = acc / d
        # rows of X <- L^-1 X^T (forward substitution, in place)
        for r in range(4):
            for i in range(m2):
                acc = X[r, i]
                for l in range(i):
                    acc -= M[i, l] * X[r, l]
                X[r, i] = acc / M[i, i]
        for i in range(4):
            for j in range(i, 4):
                acc = 0.0
                for l in range(m2):
                    acc += X[i, l] * X[j, l]
                g[i, j] = target[i, j] - acc
                g[j, i] = g[i, j]
        out[p] = _mu2_from_4x4_nb(g)
    return out


def conditioned_mu2_nb(target, cross, gcc, s, theta):
    return _conditioned_mu2_nb_impl(
        np.ascontiguousarray(target, dtype=np.float64),
        np.ascontiguousarray(cross, dtype=np.float64),
        np.ascontiguousarray(gcc, dtype=np.float64),
        np.ascontiguousarray(np.atleast_2d(s), dtype=np.float64),
        np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64),
    )


def _mu2_from_4x4_np(g):
    detA = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
    detB = g[:, 2, 2] * g[:, 3, 3] - g[:, 2, 3] * g[:, 3, 2]
    detC = g[:, 0, 2] * g[:, 1, 3] - g[:, 0, 3] * g[:, 1, 2]
    delta = detA + detB - 2.0 * detC
    Delta = np.linalg.det(g)
    disc = np.maximum(delta * delta - 4.0 * Delta, 0.0)
    return np.sqrt(np.maximum(0.5 * (delta - np.sqrt(disc)), 0.0))


def conditioned_mu2_np(target, cross, gcc, s, theta):
    target = np.asarray(target, dtype=np.float64)
    cross = np.asarray(cross, dtype=np.float64)
    gcc = np.asarray(gcc, dtype=np.float64)
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    theta = np.atleast_2d(np.asarray(theta, dtype=np.float64))
    npts, k = s.shape
    m2 = 2 * k
    out = np.empty(npts)
    for lo in range(0, npts, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, npts))
        n = sl.stop - sl.start
        ct, st = np.cos(theta[sl]), np.sin(theta[sl])
        R = np.zeros((n, m2, m2))
        R[:, 0::2, 0::2][:, range(k), range(k)] = ct
        R[:, 0::2, 1::2][:, range(k), range(k)] = st
        R[:, 1::2, 0::2][:, range(k), range(k)] = -st
        R[:, 1::2, 1::2][:, range(k), range(k)] = ct
        q = np.ones((n, m2))
        q[:, 0::2] = np.sqrt(s[sl])
        d = np.ones((n, m2))
        d[:, 1::2] = s[sl]
        Ch = np.einsum("nji,jk,nkl->nil", R, gcc, R)
        M = q[:, :, None] * Ch * q[:, None, :]
        M[:, range(m2), range(m2)] += d
        Minv = np.linalg.inv(M)
        K = np.einsum("nij,njk,nlk->nil", R, q[:, :, None] * Minv * q[:, None, :], R)
        g = target[None] - np.einsum("ij,njk,lk->nil", cross, K, cross)
        out[sl] = _mu2_from_4x4_np(g)
    return out


if USE_NUMBA:
    threemode_f_grid = threemode_f_grid_nb
    conditioned_mu2 = conditioned_mu2_nb
else:
    threemode_f_grid = threemode_f_grid_np
    conditioned_mu2 = conditioned_mu2_np

BACKEND = "numba" if USE_NUMBA else "numpy"
