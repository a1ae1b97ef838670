"""Python access to the fkpam core: fBm sampling, random walks, kernels and the FK/PDE solvers."""

from ._fkpam import (
    ConfigError,
    EstimateResult,
    ExactModeCapExceeded,
    __version__,
    covariance,
    eps_autocov,
    estimate_quenched,
    f_eps,
    h_eps,
    increment_covariance,
    difference_variance,
    rate_sweep,
    rho,
    rough_stats,
    run_criterion,
    s2,
    s3,
    sample_at_times,
    sample_grid_path,
    sample_walk,
    solve_mollified,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
