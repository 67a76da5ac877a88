"""Standard covariance matrices and random-state generators."""

import numpy as np
from scipy.linalg import expm

from .gaussian import symplectic_form


def vacuum(n_modes):
    return np.eye(2 * n_modes)


def thermal(nus):
    """Product of thermal states with symplectic eigenvalues ``nus`` (each >= 1)."""
    return np.diag(np.repeat(np.asarray(nus, dtype=np.float64), 2))


def tmsv(s):
    """Two-mode squeezed vacuum with squeezing ``s``: x-x correlated, p-p anticorrelated."""
    ch, sh = np.cosh(2.0 * s), np.sinh(2.0 * s)
    return np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )


def isotropic_example_pure():
    """Pure three-mode CM whose multiple by 2 is the standard worked example."""
    return np.array(
        [
            [3.0, 0.0, 2.0, 0.0, 2.0, 0.0],
            [0.0, 3.0, 0.0, -2.0, 0.0, -2.0],
            [2.0, 0.0, 2.0, 0.0, 1.0, 0.0],
            [0.0, -2.0, 0.0, 2.0, 0.0, 1.0],
            [2.0, 0.0, 1.0, 0.0, 2.0, 0.0],
            [0.0, -2.0, 0.0, 1.0, 0.0, 2.0],
        ]
    )


def random_symplectic(n_modes, rng, scale=0.6):
    """``exp(Omega H)`` for a random symmetric ``H``; always exactly symplectic up to round-off."""
    h = rng.normal(size=(2 * n_modes, 2 * n_modes)) * scale
    h = 0.5 * (h + h.T)
    return expm(symplectic_form(n_modes) @ h)


def random_physical_cm(n_modes, rng, scale=0.6, mean_excess=1.0):
    """``S diag(nu) S^T`` with thermal symplectic eigenvalues ``nu = 1 + Exp(mean_excess)``."""
    S = random_symplectic(n_modes, rng, scale)
    nus = 1.0 + rng.exponential(mean_excess, size=n_modes)
    g = S @ thermal(nus) @ S.T
    return 0.5 * (g + g.T)


def random_pure_cm(n_modes, rng, scale=0.6):
    S = random_symplectic(n_modes, rng, scale)
    g = S @ S.T
    return 0.5 * (g + g.T)


def random_isotropic_cm(n_modes, rng, scale=0.6, nu=None):
    if nu is None:
        nu = 1.0 + rng.exponential(1.0)
    return nu * random_pure_cm(n_modes, rng, scale)
