"""Shared test helpers."""

import numpy as np

from cvloc.errors import UnphysicalStateError
from cvloc.symmetric import SymmetricStateParams, build_symmetric_cm


def random_symmetric_params(rng, n_modes=None, max_tries=1000):
    """Random physical fully symmetric parameters (rejection sampling)."""
    for _ in range(max_tries):
        n = int(rng.integers(3, 6)) if n_modes is None else n_modes
        b = rng.uniform(1.2, 4.0)
        e1 = rng.uniform(-b, b)
        e2 = rng.uniform(-b, b)
        p = SymmetricStateParams(n, b, e1, e2)
        try:
            build_symmetric_cm(p)
        except (UnphysicalStateError, ValueError):
            continue
        return p
    raise RuntimeError("no physical parameters found")


def mu2_of(gab):
    from cvloc.gaussian import ptranspose_symplectic_eigs

    return ptranspose_symplectic_eigs(gab)[1]
