"""Gaussian localizable entanglement of multimode continuous-variable states."""

from ._kernels import BACKEND
from .cmfile import format_cm, parse_cm, read_cm, write_cm
from .fock import SPDParams, average_localized, gaussian_baseline, log_negativity_fock, rho1
from .gaussian import (
    TOL_PHYS,
    apply_symplectic,
    beam_splitter_matrix,
    det_sum_2x2,
    log_negativity,
    ptranspose_symplectic_eigs,
    ptranspose_two_mode,
    symplectic_eigenvalues,
    validate_cm,
)
from .measurement import (
    condition_on_homodyne,
    condition_on_mode,
    condition_on_modes,
    pure_measurement_cm,
    standardize_measured_mode,
)
from .symmetric import (
    BisymmetricStateParams,
    SymmetricStateParams,
    bisymmetric_localizable,
    build_bisymmetric_cm,
    build_symmetric_cm,
    detect_bisymmetric,
    detect_symmetric,
    lambda_min,
    symmetric_localizable,
)
from .oracle import SweepSpec, simulate_fig1_circuit, sweep_gaussian
from .threemode import (
    ThreeModeState,
    isotropic_check,
    isotropic_optimal,
    optimal_homodyne,
    optimize_gaussian,
)

__version__ = "0.1.0"
