"""Real roots of low-order polynomials via companion-matrix eigenvalues."""

import numpy as np


def companion(coeffs):
    """Companion matrix of ``sum_i coeffs[i] x^i`` (ascending order, nonzero leading term)."""
    c = np.asarray(coeffs, dtype=np.float64)
    n = c.size - 1
    M = np.zeros((n, n))
    M[1:, :-1] = np.eye(n - 1)
    M[:, -1] = -c[:-1] / c[-1]
    return M


def trim(coeffs, rtol=1e-14):
    """Drop leading (highest-order) coefficients that are negligible against the largest one."""
    c = np.asarray(coeffs, dtype=np.float64)
    scale = np.max(np.abs(c)) if c.size else 0.0
    k = c.size
    while k > 0 and abs(c[k - 1]) <= rtol * scale:
        k -= 1
    return c[:k]


def real_roots(coeffs, imag_tol=1e-7, polish=3):
    """Real roots of ``sum_i coeffs[i] x^i``.

    Complex eigenvalues with ``|Im z| <= imag_tol * (1 + |z|)`` count as real
    (double roots split into a near-real conjugate pair).  Each accepted root
    gets a few Newton steps on the original polynomial.
    """
    c = trim(coeffs)
    if c.size < 2:
        return np.empty(0)
    z = np.linalg.eigvals(companion(c))
    z = z[np.abs(z.imag) <= imag_tol * (1.0 + np.abs(z))].real
    desc = c[::-1]
    ddesc = np.polyder(desc)
    out = []
    for x in z:
        for _ in range(polish):
            d = np.polyval(ddesc, x)
            if d == 0.0:
                break
            step = np.polyval(desc, x) / d
            if not np.isfinite(step) or abs(step) > 1e-3 * (1.0 + abs(x)):
                break
            x -= step
        out.append(x)
    return np.sort(np.array(out))
