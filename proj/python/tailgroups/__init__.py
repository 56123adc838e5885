"""Extremal dependence groups: tail fits, spectral clustering and joint tail risk.

Columns are 0-based. Matrices are (n, d) float arrays; ``z`` arguments are on
the standard Pareto scale (see ``rank_standardize``).
"""

from ._core import (
    ConvergenceError,
    DegenerateSample,
    Error,
    ExtremalParams,
    GpdParams,
    InvalidArgument,
    RiskEstimate,
    TailIndexEstimate,
    classify_recovery,
    eigengap_count,
    estimate_weights,
    experiment_dataset,
    experiment_ground_truth,
    extremal_clustering,
    gpd_fit,
    gpd_sample,
    gpd_survival,
    gumbel_copula_sample,
    hill_curve,
    hill_estimate,
    inverse_polar,
    joint_exceedance_probability,
    laplacian_eigenvalues,
    pair_exceedance_oracle,
    polar_transform,
    rank_standardize,
    simulate_joint_tail,
    spectral_cluster,
)

__all__ = [name for name in dir() if not name.startswith("_")]
