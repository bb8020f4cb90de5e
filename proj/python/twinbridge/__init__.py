"""Python bindings for the twinbridge C++ library."""

from ._twinbridge import (
    ConfigError,
    DomainError,
    Error,
    GaussianProcess,
    NetworkState,
    cost_aware_ei,
    default_grid,
    expected_improvement,
    kl_divergence,
    latency_mean,
    quantile_levels,
    quantile_residuals,
    run,
    sample_latency,
    spec_keys,
    state_cost,
    update_alpha,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "GaussianProcess",
    "NetworkState",
    "cost_aware_ei",
    "default_grid",
    "expected_improvement",
    "kl_divergence",
    "latency_mean",
    "quantile_levels",
    "quantile_residuals",
    "run",
    "sample_latency",
    "spec_keys",
    "state_cost",
    "update_alpha",
]
