"""Risk-sensitive transmission control for a finite-buffer queue.

Solvers for the multiplicative Bellman equation, closed-form evaluation of
threshold policies, brute-force oracles and a seeded simulator.
"""

from .analytics import cost_interval, solve_alpha, value_closed_form
from .errors import (
    ConvergenceError,
    DomainError,
    InconsistencyError,
    NonThresholdPolicyError,
    NumericError,
    ParameterRangeError,
    PropertyViolation,
    RiskQError,
)
from .model import ModelParams, bellman_apply, differential, transition_kernel
from .oracle import enumerate_policies, exp_moment_exact, risk_neutral_average_cost, spectral_radius
from .rvi import RviOptions, ThresholdPolicy, rvi_solve, sweep_cost
from .simulate import SimConfig, estimate_risk_cost, simulate_path

__version__ = "0.1.0"
