"""Simulation and parameter estimation for second-order SPDEs on the unit cube."""

from .estimate import (
    DataError,
    EstimationReport,
    InteriorMarginError,
    estimate_alpha,
    estimate_sigma_point,
    estimate_sigma_pooled,
    log_linear_fit,
    quarticity,
    realized_volatilities,
    realized_volatility,
    scheme_checks,
    separation_statistic,
    thin_time_grid,
    validate_scheme,
)
from .io import load_field, save_field
from .model import (
    S3,
    FieldSample,
    ModelParams,
    SamplingScheme,
    alpha_variance_constant,
    asymptotic_sigma_matrix,
    eigenfunction,
    eigenfunction_matrix,
    eigenvalue,
    eigenvalues,
    lambda_const,
    rescaling_constant_K,
    theoretical_autocorrelation,
    theoretical_mean_sq_increment,
    upsilon,
)
from .numerics import FullRankViolation, RngStream, summary
from .simulate import (
    BudgetExceeded,
    CacheKeyMismatch,
    OffGridError,
    ReplacementSettings,
    TruncationSettings,
    build_cache,
    replacement_variance,
    simulate_replacement,
    simulate_truncation,
)

__version__ = "0.1.0"
