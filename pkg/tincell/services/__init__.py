"""Numerical engines, simulation, sweeps and output formatting."""

from tincell.services.analytics import (
    coverage_active,
    coverage_classical,
    coverage_effective,
    laplace_interference,
    prob_tin,
    rate_active,
    rate_classical,
    rate_effective,
)
from tincell.services.asymptotics import (
    cnet_small_theta,
    coverage_highsnr_integral,
    coverage_series,
    prob_tin_highsnr,
    r_statistic,
    solve_optimal_mu,
)
from tincell.services.simulator import (
    estimate_coverage,
    estimate_prob_tin,
    estimate_rate,
    run_trials,
    sample_network,
)
from tincell.services.config import load_config

__all__ = [
    "coverage_active",
    "coverage_classical",
    "coverage_effective",
    "laplace_interference",
    "prob_tin",
    "rate_active",
    "rate_classical",
    "rate_effective",
    "cnet_small_theta",
    "coverage_highsnr_integral",
    "coverage_series",
    "prob_tin_highsnr",
    "r_statistic",
    "solve_optimal_mu",
    "estimate_coverage",
    "estimate_prob_tin",
    "estimate_rate",
    "run_trials",
    "sample_network",
    "load_config",
]
