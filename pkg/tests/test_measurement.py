import math

import numpy as np
import pytest

from cvloc import states
from cvloc.errors import DimensionError, NumericError, UnphysicalStateError
from cvloc.gaussian import log_negativity, ptranspose_symplectic_eigs, validate_cm
from cvloc.measurement import (
    MeasurementCM,
    condition_on_homodyne,
    condition_on_mode,
    condition_on_modes,
    homodyne_direction,
    partition,
    pure_measurement_cm,
    standardize_measured_mode,
)
from cvloc.symmetric import SymmetricStateParams, build_symmetric_cm, symmetric_localizable


def test_pure_measurement_examples():
    np.testing.assert_allclose(np.asarray(pure_measurement_cm(0.0, 0.7)), np.eye(2), atol=1e-15)
    r = 0.8
    np.testing.assert_allclose(np.asarray(pure_measurement_cm(r, 0.0)), np.diag([math.exp(2 * r), math.exp(-2 * r)]))
    np.testing.assert_allclose(
        np.asarray(pure_measurement_cm(r, math.pi / 2)), np.diag([math.exp(-2 * r), math.exp(2 * r)]), atol=1e-14
    )


def test_pure_measurement_is_pure(rng):
    for _ in range(20):
        m = np.asarray(pure_measurement_cm(rng.uniform(0, 3), rng.uniform(0, math.pi)))
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12 * np.max(m) ** 2)
        assert np.all(np.linalg.eigvalsh(m) > 0)


def test_pure_measurement_rejects_infinite_r():
    with pytest.raises(ValueError):
        pure_measurement_cm(math.inf, 0.0)


def test_homodyne_direction_convention():
    # theta = 0 measures p, theta = pi/2 measures x
    np.testing.assert_allclose(homodyne_direction(0.0), [0.0, 1.0])
    np.testing.assert_allclose(homodyne_direction(math.pi / 2), [1.0, 0.0], atol=1e-16)


def test_partition_reassembles(rng):
    g = states.random_physical_cm(4, rng)
    for mode in range(4):
        np.testing.assert_array_equal(partition(g, mode).reassemble(), g)
    with pytest.raises(DimensionError):
        partition(g, 4)


def test_uncorrelated_mode_leaves_rest_unchanged(rng):
    gab = states.random_physical_cm(2, rng)
    g = np.zeros((6, 6))
    g[:4, :4] = gab
    g[4:, 4:] = 3.0 * np.eye(2)
    np.testing.assert_allclose(condition_on_mode(g, 2, pure_measurement_cm(0.4, 0.2)), gab)
    np.testing.assert_allclose(condition_on_homodyne(g, 2, 0.9), gab)


def test_worked_example_coherent_projection():
    g = 2.0 * states.isotropic_example_pure()
    cond = condition_on_mode(g, 2, np.eye(2))
    assert ptranspose_symplectic_eigs(cond)[1] == pytest.approx(0.5917, abs=1e-4)


def test_matrix_and_measurement_object_agree(rng):
    g = states.random_physical_cm(3, rng)
    m = pure_measurement_cm(0.9, 1.1)
    np.testing.assert_allclose(condition_on_mode(g, 1, m), condition_on_mode(g, 1, np.asarray(m)), atol=1e-12)


def test_conditioning_decreases_in_matrix_order(rng):
    for _ in range(50):
        g = states.random_physical_cm(3, rng)
        out = condition_on_mode(g, 2, pure_measurement_cm(rng.uniform(0, 3), rng.uniform(0, math.pi)))
        diff = partition(g, 2).kept - out
        assert np.min(np.linalg.eigvalsh(diff)) >= -1e-10


@pytest.mark.parametrize("r", [20.0, 35.0])
def test_large_r_matches_homodyne(rng, r):
    tol = 1e-7 if r == 20.0 else 1e-12
    for _ in range(30):
        g = states.random_physical_cm(3, rng)
        th = rng.uniform(0, math.pi)
        diff = condition_on_mode(g, 2, pure_measurement_cm(r, th)) - condition_on_homodyne(g, 2, th)
        assert np.max(np.abs(diff)) <= tol


def test_singular_raw_matrix_raises():
    g = np.eye(6)
    with pytest.raises(NumericError):
        condition_on_mode(g, 2, np.diag([-1.0, 1.0]))


def test_homodyne_zero_variance_raises():
    g = np.eye(6)
    g[5, 5] = 0.0
    with pytest.raises(NumericError):
        condition_on_homodyne(g, 2, 0.0)


def test_symmetric_p_homodyne_matches_closed_form():
    p = SymmetricStateParams(3, 2.0, 0.6, -0.8)
    res = symmetric_localizable(p)
    th = 0.0 if res.quadrature == "p" else math.pi / 2
    cond = condition_on_homodyne(build_symmetric_cm(p), 2, th)
    assert ptranspose_symplectic_eigs(cond)[1] ** 2 == pytest.approx(res.mu2**2, abs=1e-9)


def test_sequential_conditioning_is_order_independent(rng):
    g = states.random_physical_cm(4, rng)
    m1, m2 = pure_measurement_cm(0.3, 0.4), ("homodyne", 1.2)
    a = condition_on_modes(g, [2, 3], [m1, m2])
    b = condition_on_modes(g, [3, 2], [m2, m1])
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_mixed_measurement_never_beats_best_pure(rng):
    for _ in range(10):
        g = states.random_physical_cm(3, rng)
        pure = [
            log_negativity(condition_on_mode(g, 2, pure_measurement_cm(r, th)))
            for r in np.linspace(0, 2.5, 26)
            for th in np.linspace(0, math.pi, 24, endpoint=False)
        ]
        pure += [log_negativity(condition_on_homodyne(g, 2, th)) for th in np.linspace(0, math.pi, 24, endpoint=False)]
        mixed = 1.7 * np.asarray(pure_measurement_cm(rng.uniform(0, 2), rng.uniform(0, math.pi)))
        assert log_negativity(condition_on_mode(g, 2, mixed)) <= max(pure) + 1e-9


def test_standardize_examples():
    g = np.eye(6)
    g[4:, 4:] = np.diag([2.0, 0.5])
    out, c = standardize_measured_mode(g, 2)
    assert c == pytest.approx(1.0)
    np.testing.assert_allclose(out[4:, 4:], np.eye(2), atol=1e-14)
    g = 2.0 * states.isotropic_example_pure()
    out, c = standardize_measured_mode(g, 2)
    assert c == pytest.approx(4.0)
    np.testing.assert_array_equal(out, g)


def test_standardize_preserves_entanglement_structure(rng):
    g = states.random_physical_cm(3, rng)
    out, c = standardize_measured_mode(g, 2)
    np.testing.assert_allclose(out[:4, :4], g[:4, :4])
    np.testing.assert_allclose(out[4:, 4:], c * np.eye(2), atol=1e-12)
    assert validate_cm(out).physical


def test_standardize_rejects_unphysical_block():
    g = np.eye(6)
    g[4:, 4:] = 0.5 * np.eye(2)
    with pytest.raises(UnphysicalStateError):
        standardize_measured_mode(g, 2)


def test_measurement_object_converts():
    m = pure_measurement_cm(0.2, 0.3)
    assert isinstance(m, MeasurementCM)
    assert np.asarray(m).shape == (2, 2)
