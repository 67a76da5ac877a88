import math

import numpy as np
import pytest

from cvloc import oracle, states
from cvloc.errors import DimensionError, NumericError, ShapeError, UnphysicalStateError
from cvloc.gaussian import ptranspose_symplectic_eigs, validate_cm
from cvloc.measurement import condition_on_modes
from cvloc.symmetric import (
    BisymmetricStateParams,
    SymmetricStateParams,
    bisymmetric_localizable,
    bs_network_reduce,
    build_bisymmetric_cm,
    build_symmetric_cm,
    detect_bisymmetric,
    detect_symmetric,
    lambda_min,
    mu2_squared_rearranged,
    splitter_network,
    symmetric_localizable,
)

from helpers import random_symmetric_params


def test_build_examples():
    np.testing.assert_array_equal(build_symmetric_cm(SymmetricStateParams(3, 1.0, 0.0, 0.0)), np.eye(6))
    assert validate_cm(build_symmetric_cm(SymmetricStateParams(3, 2.0, 1.0, -0.5))).physical
    with pytest.raises(UnphysicalStateError) as info:
        build_symmetric_cm(SymmetricStateParams(4, 1.0, 0.5, -0.5))
    assert info.value.witness < 1.0


def test_too_few_modes():
    with pytest.raises(DimensionError):
        SymmetricStateParams(2, 2.0, 0.1, 0.1)
    with pytest.raises(DimensionError):
        BisymmetricStateParams(2, 2.0, 0.1, 0.1, 2.0, 0.0, 0.0)


def test_lambda_min_examples():
    assert lambda_min(SymmetricStateParams(3, 2.0, 0.0, 0.0)) == 1.0
    assert lambda_min(SymmetricStateParams(3, 2.0, 1.0, -0.5)) == pytest.approx(0.5)


def test_symmetric_localizable_worked_numbers():
    res = symmetric_localizable(SymmetricStateParams(3, 2.0, 1.0, -0.5))
    assert res.mu2**2 == pytest.approx(1.25)
    assert res.e_lg == 0.0
    assert res.quadrature == "p"
    res = symmetric_localizable(SymmetricStateParams(4, 3.0, 0.0, 0.0))
    assert res.mu2 == pytest.approx(3.0) and res.e_lg == 0.0


def test_quadrature_tag_follows_minimising_correlation():
    # the x-x correlation is the negative one here, so x is measured
    assert symmetric_localizable(SymmetricStateParams(3, 2.0, -0.5, 1.0)).quadrature == "x"


def test_domain_error_for_nonpositive_denominator():
    with pytest.raises(ValueError):
        lambda_min(SymmetricStateParams(5, 1.0, -0.6, 0.2))


def test_rearranged_form_identity(rng):
    for _ in range(200):
        p = random_symmetric_params(rng)
        assert mu2_squared_rearranged(p) == pytest.approx(symmetric_localizable(p).mu2 ** 2, rel=1e-12)


def test_nonnegative_det_eps_gives_zero(rng):
    seen = 0
    for _ in range(400):
        p = random_symmetric_params(rng)
        if p.eps1 * p.eps2 >= 0.0:
            seen += 1
            assert symmetric_localizable(p).e_lg == 0.0
    assert seen > 20


def test_homodyne_pipeline_attains_closed_form(rng):
    for _ in range(60):
        p = random_symmetric_params(rng)
        res = symmetric_localizable(p)
        th = 0.0 if res.quadrature == "p" else math.pi / 2
        n = p.n_modes
        cond = condition_on_modes(build_symmetric_cm(p), list(range(2, n)), [("homodyne", th)] * (n - 2))
        assert ptranspose_symplectic_eigs(cond)[1] == pytest.approx(res.mu2, abs=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_network_reduction(rng, n):
    p = random_symmetric_params(rng, n_modes=n)
    rep = bs_network_reduce(build_symmetric_cm(p))
    assert rep.max_block_error <= 1e-10
    assert len(rep.decoupled) == n - 2
    S = splitter_network(n)
    np.testing.assert_allclose(S @ S.T, np.eye(2 * n), atol=1e-14)


def test_network_reduction_uncorrelated():
    rep = bs_network_reduce(build_symmetric_cm(SymmetricStateParams(4, 1.5, 0.0, 0.0)))
    np.testing.assert_allclose(rep.ac1, 1.5 * np.eye(4), atol=1e-14)


def test_network_reduction_rejects_generic_state(rng):
    with pytest.raises(ShapeError):
        bs_network_reduce(states.random_physical_cm(4, rng))


def _bisymmetric_example(n=4, tau_scale=0.3):
    return BisymmetricStateParams(n, 2.0, 0.8, -0.7, 1.8, 0.3, -0.2, tau_scale * np.array([[1.0, 0.2], [-0.1, -1.0]]))


def test_bisymmetric_network_and_build():
    p = _bisymmetric_example()
    g = build_bisymmetric_cm(p)
    rep = bs_network_reduce(g)
    assert rep.max_block_error <= 1e-10


def test_bisymmetric_embedding(rng):
    for _ in range(30):
        p = random_symmetric_params(rng)
        a = symmetric_localizable(p)
        b = bisymmetric_localizable(BisymmetricStateParams.from_symmetric(p))
        assert b.mu2 == pytest.approx(a.mu2, abs=1e-9)


def test_bisymmetric_tau_zero_uses_bracket_edge():
    p = BisymmetricStateParams(4, 2.0, 0.8, -0.7, 1.8, 0.3, -0.2)
    res = bisymmetric_localizable(p)
    bme = np.diag([2.0 - 0.8, 2.0 + 0.7])
    bpe = np.diag([2.0 + 0.8, 2.0 - 0.7])
    assert res.lambda_min == pytest.approx(np.min(np.diag(bpe) / np.diag(bme)))
    # decoupled C modes: the answer is just the A-B pair's own negativity
    gab = build_bisymmetric_cm(p)[:4, :4]
    assert res.mu2 == pytest.approx(ptranspose_symplectic_eigs(gab)[1], rel=1e-9)


def test_bisymmetric_matches_homodyne_sweep_on_reduced_block():
    p = _bisymmetric_example(n=3)
    g = build_bisymmetric_cm(p)
    res = bisymmetric_localizable(p)
    ths = np.linspace(0, math.pi, 20001)
    mu2 = oracle.evaluate_points(g, (0, 1), (2,), np.ones((ths.size, 1)), ths[:, None])
    assert res.mu2 == pytest.approx(float(mu2.min()), abs=1e-6)


def test_bisymmetric_degenerate_input_reports_spectrum():
    p = BisymmetricStateParams(3, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * np.eye(2))
    with pytest.raises(NumericError, match="spectrum"):
        bisymmetric_localizable(p)


def test_detectors_recover_params_after_local_symplectic(rng):
    p = SymmetricStateParams(4, 3.0, 0.9, -0.6)
    g = build_symmetric_cm(p)
    S2 = states.random_symplectic(1, rng)
    S = np.kron(np.eye(4), S2)
    det = detect_symmetric(S @ g @ S.T)
    assert det
    assert symmetric_localizable(det.params).mu2 == pytest.approx(symmetric_localizable(p).mu2, rel=1e-9)
    bis = detect_bisymmetric(S @ g @ S.T)
    assert bis
    assert bisymmetric_localizable(bis.params).mu2 == pytest.approx(symmetric_localizable(p).mu2, rel=1e-8)


def test_detectors_explain_failure(rng):
    det = detect_symmetric(states.random_physical_cm(4, rng))
    assert not det and det.reason
    assert not detect_bisymmetric(states.random_physical_cm(4, rng))
    assert not detect_symmetric(np.eye(4))


@pytest.mark.slow
def test_full_product_grid_n4():
    rng = np.random.default_rng(11)
    for _ in range(2):
        p = random_symmetric_params(rng, n_modes=4)
        res = symmetric_localizable(p)
        sweep = oracle.sweep_gaussian(build_symmetric_cm(p), (0, 1), (2, 3), max_points=2 * 10**7, keep_table=False)
        assert sweep.best_e <= res.e_lg + 1e-7
        assert sweep.best_mu2 >= res.mu2 - 1e-7


def test_eps_swap_changes_only_quadrature(rng):
    for _ in range(50):
        p = random_symmetric_params(rng)
        q = SymmetricStateParams(p.n_modes, p.b, p.eps2, p.eps1)
        a, b = symmetric_localizable(p), symmetric_localizable(q)
        assert a.mu2 == pytest.approx(b.mu2, rel=1e-12)
        if a.e_lg > 0:
            assert {a.quadrature, b.quadrature} == {"x", "p"}
