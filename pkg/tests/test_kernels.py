import math

import numpy as np
import pytest

from cvloc import _kernels, oracle, states
from cvloc.threemode import ThreeModeState, kernel_consts


def test_backend_flag():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_threemode_grid_backends_agree(rng):
    ys = np.concatenate([np.linspace(0, 1, 33)])
    ths = np.linspace(0, math.pi, 29)
    for _ in range(10):
        consts = kernel_consts(ThreeModeState.from_cm(states.random_physical_cm(3, rng)))
        a = _kernels.threemode_f_grid_nb(consts, ys, ths)
        b = _kernels.threemode_f_grid_np(consts, ys, ths)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_conditioned_mu2_backends_agree(rng, k):
    g = states.random_physical_cm(2 + k, rng)
    tgt, cross, gcc = oracle._blocks(g, (0, 1), tuple(range(2, 2 + k)))
    s = rng.uniform(0, 1, size=(500, k))
    s[:50] = 0.0  # exact homodyne rows
    th = rng.uniform(0, math.pi, size=(500, k))
    a = _kernels.conditioned_mu2_nb(tgt, cross, gcc, s, th)
    b = _kernels.conditioned_mu2_np(tgt, cross, gcc, s, th)
    np.testing.assert_allclose(a, b, rtol=1e-11)


def test_conditioned_mu2_matches_threemode_closed_form(rng):
    g = states.random_physical_cm(3, rng)
    st = ThreeModeState.from_cm(g)
    ys = np.linspace(0, 1, 11)
    ths = np.linspace(0, math.pi, 13)
    f = _kernels.threemode_f_grid_np(kernel_consts(st), ys, ths)
    Y, T = np.meshgrid(ys, ths, indexing="ij")
    mu2 = oracle.evaluate_points(st.gamma, (0, 1), (2,), Y.reshape(-1, 1), T.reshape(-1, 1))
    np.testing.assert_allclose(mu2**2, (f / 2).ravel(), rtol=1e-9)
