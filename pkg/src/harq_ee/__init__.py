"""Energy-efficient power allocation and rate selection for HARQ over time-correlated Rayleigh fading."""
from .allocator import AllocationResult, PowerLadder, allocate
from .baselines import BaselineSolution, grid_oracle_allocate, grid_oracle_solve, uniform_power_solve
from .channel_sim import MonteCarloReport, draw_channels, estimate_ee, estimate_outage
from .corefns import ChannelSpec, QosSpec, Scheme, ell, g, kappa, phi, psi, theta, varsigma
from .limits import AsymptoticReport, ee_limit, kappa_inf, theta_inf
from .optimizer import (
    InfeasibleError,
    Solution,
    lambda_direct_rate_ir,
    optimal_alpha,
    optimal_rate_ir,
    optimal_rate_typeI_cc,
    solve,
)

__all__ = [
    "AllocationResult", "AsymptoticReport", "BaselineSolution", "ChannelSpec", "InfeasibleError",
    "MonteCarloReport", "PowerLadder", "QosSpec", "Scheme", "Solution", "allocate", "draw_channels",
    "ee_limit", "ell", "estimate_ee", "estimate_outage", "g", "grid_oracle_allocate", "grid_oracle_solve",
    "kappa", "kappa_inf", "lambda_direct_rate_ir", "optimal_alpha", "optimal_rate_ir",
    "optimal_rate_typeI_cc", "phi", "psi", "solve", "theta", "theta_inf", "uniform_power_solve", "varsigma",
]
