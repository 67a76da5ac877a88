import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cvloc import states
from cvloc.cmfile import format_cm, parse_cm
from cvloc.gaussian import apply_symplectic, local_symplectic, log_negativity, ptranspose_symplectic_eigs, validate_cm
from cvloc.measurement import condition_on_homodyne, condition_on_mode, pure_measurement_cm
from cvloc.symmetric import build_symmetric_cm, symmetric_localizable
from cvloc.threemode import ThreeModeState, objective_f, optimize_gaussian

from helpers import random_symmetric_params

seeds = st.integers(0, 2**32 - 1)
phases = st.floats(0.0, math.pi)
squeezing = st.floats(0.0, 3.0)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_negativity_invariant_under_local_symplectic(seed):
    rng = np.random.default_rng(seed)
    g = states.random_physical_cm(2, rng)
    S = local_symplectic(2, int(rng.integers(2)), states.random_symplectic(1, rng))
    assert abs(log_negativity(apply_symplectic(g, S)) - log_negativity(g)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds, squeezing, phases)
def test_conditioning_keeps_state_physical(seed, r, th):
    g = states.random_physical_cm(3, np.random.default_rng(seed))
    assert validate_cm(condition_on_mode(g, 2, pure_measurement_cm(r, th))).physical
    assert validate_cm(condition_on_homodyne(g, 2, th)).physical


@settings(max_examples=40, deadline=None)
@given(seeds, squeezing, phases)
def test_objective_is_pi_periodic(seed, r, th):
    s = ThreeModeState.from_cm(states.random_physical_cm(3, np.random.default_rng(seed)))
    a, b = objective_f(s, r, th), objective_f(s, r, th + math.pi)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=25, deadline=None)
@given(seeds, squeezing, phases)
def test_optimizer_beats_any_single_setting(seed, r, th):
    s = ThreeModeState.from_cm(states.random_physical_cm(3, np.random.default_rng(seed)))
    mu2 = optimize_gaussian(s).mu2
    assert mu2 <= math.sqrt(objective_f(s, r, th) / 2) + 1e-9
    assert mu2 <= math.sqrt(objective_f(s, math.inf, th) / 2) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, phases)
def test_symmetric_closed_form_beats_common_homodyne(seed, th):
    rng = np.random.default_rng(seed)
    p = random_symmetric_params(rng)
    n = p.n_modes
    g = build_symmetric_cm(p)
    for m in range(n - 1, 1, -1):
        g = condition_on_homodyne(g, m, th)
    assert symmetric_localizable(p).mu2 <= ptranspose_symplectic_eigs(g)[1] + 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_file_round_trip(seed, n):
    g = states.random_physical_cm(n, np.random.default_rng(seed))
    assert np.array_equal(parse_cm(format_cm(g)).matrix, g)
