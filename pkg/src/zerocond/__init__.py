"""Conditional zero statistics of Gaussian random polynomials.

Library plus CLI simulator for the conditional distribution of zeros of
Gaussian random polynomials and holomorphic sections at desk scale:
conditional Szego kernels, exact linear-constraint Gaussian sampling,
closed-form scaling-limit densities, pair-correlation comparisons, and the
degree-correction law, each verified against Monte Carlo.
"""

from ._aberth import NUMBA_AVAILABLE, backend_name
from ._version import __version__
from .densities import (
    FsRadialBump,
    RadialProfile,
    bipotential,
    bipotential_profile,
    conditional_density_finiteN,
    correction_target,
    flat_model_log_integral,
    joint_zero_density_unnormalized,
    kappa_cond,
    limit_density_kkm,
    pair_correlation_limit,
    pair_potential,
    relative_potential,
    unscaled_correction,
)
from .ensembles import (
    ConditioningError,
    ConditionSpec,
    EnsembleSpec,
    SectionSample,
    basis_eval,
    condition_sample,
    diag_kernel_norm,
    evaluate_section,
    project_to_conditions,
    sample_section,
)
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .kernels import (
    CoherentFrame,
    KernelEval,
    conditional_kernel_diag,
    far_offdiagonal_check,
    fs_distance,
    kernel_eval,
    near_diagonal_residual,
)
from .numerics import RadialCurve, StreamingStat, dilog, sample_std_complex_gaussian, trial_rng, zeta_value
from .zeros import ZeroSet, find_zeros, scaled_radii

__all__ = [
    "NUMBA_AVAILABLE",
    "backend_name",
    "__version__",
    "FsRadialBump",
    "RadialProfile",
    "bipotential",
    "bipotential_profile",
    "conditional_density_finiteN",
    "correction_target",
    "flat_model_log_integral",
    "joint_zero_density_unnormalized",
    "kappa_cond",
    "limit_density_kkm",
    "pair_correlation_limit",
    "pair_potential",
    "relative_potential",
    "unscaled_correction",
    "ConditioningError",
    "ConditionSpec",
    "EnsembleSpec",
    "SectionSample",
    "basis_eval",
    "condition_sample",
    "diag_kernel_norm",
    "evaluate_section",
    "project_to_conditions",
    "sample_section",
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    "CoherentFrame",
    "KernelEval",
    "conditional_kernel_diag",
    "far_offdiagonal_check",
    "fs_distance",
    "kernel_eval",
    "near_diagonal_residual",
    "RadialCurve",
    "StreamingStat",
    "dilog",
    "sample_std_complex_gaussian",
    "trial_rng",
    "zeta_value",
    "ZeroSet",
    "find_zeros",
    "scaled_radii",
]
