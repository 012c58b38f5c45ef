"""Fractional Fokker-Planck solver with an alpha-stable particle benchmark."""

from ._core import (
    ConfigError,
    DomainError,
    NumericError,
    RobustSummary,
    RunConfig,
    SimulationError,
    evaluate,
    fou_stationary_scale,
    frac_multiplier,
    report,
    resolve_config,
    robust_summary,
    simulate,
    stable_cf,
    stable_quantile,
    stable_samples,
    train,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericError",
    "RobustSummary",
    "RunConfig",
    "SimulationError",
    "evaluate",
    "fou_stationary_scale",
    "frac_multiplier",
    "report",
    "resolve_config",
    "robust_summary",
    "simulate",
    "stable_cf",
    "stable_quantile",
    "stable_samples",
    "train",
]
