"""Drift estimation for Ornstein-Uhlenbeck processes driven by mixed fractional noise."""

from ._mfou import (
    IoError,
    NumericalError,
    ValidationError,
    bracket_slope_asymptotics,
    check_conditions,
    eigen_asymptotics,
    estimate,
    kernel,
    laplace,
    montecarlo_laplace,
    perturbed_endpoint_slope,
    regression_variance_constant,
    run_campaign,
    run_sweep,
    simulate,
)

__all__ = [
    "IoError",
    "NumericalError",
    "ValidationError",
    "bracket_slope_asymptotics",
    "check_conditions",
    "eigen_asymptotics",
    "estimate",
    "kernel",
    "laplace",
    "montecarlo_laplace",
    "perturbed_endpoint_slope",
    "regression_variance_constant",
    "run_campaign",
    "run_sweep",
    "simulate",
]
