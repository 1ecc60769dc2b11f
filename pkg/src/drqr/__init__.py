"""Distributionally robust quantile regression under Wasserstein ambiguity.

Fits the exact convex reformulation of the robust check-loss problem,
constructs worst-case distributions, evaluates finite-sample radius
schedules, runs the fixed-design pipeline and ships a simulation harness.
"""

from .constants import RobustConstants, c_alpha_p, intercept_shift, k_constants, lambda_star
from .core import (AugmentedCoefficient, DataError, Dataset, DomainError,
                   ProblemSpec, WeightedPointCloud, alpha_quantile, check_loss,
                   dual_direction, dual_norm, load_dataset, mean_check_loss)
from .bounds import BoundReport, oos_gap, radius_schedule, regularized_bound
from .fixed_design import (FixedDesignFit, FixedDesignRadii, fixed_design_dro,
                           fixed_design_radii, ols_fit)
from .robust import (IdentityAuditReport, InnerSupResult, identity_audit,
                     oracle_sup, project_residuals, worst_case_value)
from .solver import FitResult, SolverConfig, fit_dro, fit_regularized, fit_saa, predict_quantile
from .worstcase import WorstCaseReport, worst_case, worst_case_p1, worst_case_p_finite, worst_case_pinf

__version__ = "0.1.0"

__all__ = [
    "AugmentedCoefficient", "BoundReport", "DataError", "Dataset", "DomainError",
    "FitResult", "FixedDesignFit", "FixedDesignRadii", "IdentityAuditReport",
    "InnerSupResult", "ProblemSpec", "RobustConstants", "SolverConfig",
    "WeightedPointCloud", "WorstCaseReport", "alpha_quantile", "c_alpha_p",
    "check_loss", "dual_direction", "dual_norm", "fit_dro", "fit_regularized",
    "fit_saa", "fixed_design_dro", "fixed_design_radii", "identity_audit",
    "intercept_shift", "k_constants", "lambda_star", "load_dataset",
    "mean_check_loss", "oos_gap", "oracle_sup", "ols_fit", "predict_quantile",
    "project_residuals", "radius_schedule", "regularized_bound",
    "worst_case", "worst_case_p1", "worst_case_p_finite", "worst_case_pinf",
    "worst_case_value",
]
