"""MMSE bounds and minimax-robust estimation for priors in a KL ball around a Gaussian."""

from .errors import (
    DimensionMismatch,
    DomainError,
    InfeasibleAlpha,
    KlMmseError,
    NonConvergent,
    NotPositiveDefinite,
)
from .gaussian_core import (
    GaussianDist,
    KlBall,
    LinearEstimator,
    SpdMatrix,
    channel_operators,
    kl_gaussian,
    mmse_estimator,
    mmse_gaussian,
    mse_linear_under_gaussian,
    toeplitz_exp_cov,
)
from .saddle_solver import (
    Branch,
    SolverConfig,
    least_favorable_vs_nominal,
    mmse_bounds,
    robust_estimator,
    solve_bounds,
    solve_saddle,
)
from .scalar_white import WhiteInstance, lambert_w, white_bounds

__all__ = [
    "Branch",
    "DimensionMismatch",
    "DomainError",
    "GaussianDist",
    "InfeasibleAlpha",
    "KlBall",
    "KlMmseError",
    "LinearEstimator",
    "NonConvergent",
    "NotPositiveDefinite",
    "SolverConfig",
    "SpdMatrix",
    "WhiteInstance",
    "channel_operators",
    "kl_gaussian",
    "lambert_w",
    "least_favorable_vs_nominal",
    "mmse_bounds",
    "mmse_estimator",
    "mmse_gaussian",
    "mse_linear_under_gaussian",
    "robust_estimator",
    "solve_bounds",
    "solve_saddle",
    "toeplitz_exp_cov",
    "white_bounds",
]

__version__ = "0.1.0"
