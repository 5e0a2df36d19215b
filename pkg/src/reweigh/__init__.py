"""Robust and heavy-tailed mean estimation by spectral sample reweighing."""

from .centers import (
    CenterCertificate,
    best_weights_for_direction,
    certify,
    combinatorial_check,
    gaussian_round,
    max_count_2d,
    spectral_objective,
)
from .core import (
    DegenerateWeightsError,
    PromiseViolation,
    ReweighError,
    approx_top_eigenvector,
    spectral_norm,
    weighted_cov_apply,
    weighted_mean,
)
from .datagen import Instance, corrupt, gen_gaussian, gen_planted_promise, gen_student_t
from .estimators import (
    EstimationReport,
    HeavyTailConfig,
    bucket_means,
    heavy_tailed_mean,
    median_of_means_1d,
    robust_mean,
    robust_mean_subgaussian,
)
from .filters import breakdown_filter, mwu_reweigh, reweigh_with_prune, subgaussian_filter
from .gd import cdgs_gradient, gd_reweigh, gd_subgaussian
from .mmw import mmw_reweigh, mmw_update
from .prune import PruneFailed, mom_prune, prune_ball
from .solution import PromiseParams, ReweighSolution, SolverConfig, WidthViolation
from .weights import in_capped_simplex, kl_project, l2_project, one_d_filter

__version__ = "0.1.0"
