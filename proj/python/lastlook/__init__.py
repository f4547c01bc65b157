"""Python bindings for the lastlook C++ core."""

from ._lastlook import (
    SolverError,
    ValidationError,
    asymptotic_coefficients,
    bvn_cdf,
    canonical_scenario,
    is_equilibrium,
    limit_checks,
    norm_cdf,
    optimal_threshold,
    quote_at,
    region_counts,
    run_command,
    sequential_migration,
    simulate,
    solve_spread,
)

__all__ = [
    "SolverError",
    "ValidationError",
    "asymptotic_coefficients",
    "bvn_cdf",
    "canonical_scenario",
    "is_equilibrium",
    "limit_checks",
    "norm_cdf",
    "optimal_threshold",
    "quote_at",
    "region_counts",
    "run_command",
    "sequential_migration",
    "simulate",
    "solve_spread",
]
