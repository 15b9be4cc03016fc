"""exitlaw: Monte Carlo sampling of Brownian-motion exit distributions.

Three independent samplers of the same boundary law — a discretized
Brownian walk, walk on spheres, and exact rejection from the ball's
closed-form exit density — plus the closed-form mean/trace/exit-time
formulas to verify them against, and a location-privacy application
built on the same machinery.
"""

__version__ = "0.1.0"

from .geometry import Ball, BoxDomain, Domain
from .exits import ExitBatch, ExitSample
from .rng import RngStream, gaussian_vector, uniform_on_sphere
from .brownian import BrownianConfig, MaxStepsExceeded, simulate_exit, simulate_exit_batch
from .wos import HopProfile, MaxHopsExceeded, WosConfig, hop_count_profile, wos_exit, wos_exit_batch
from .ball import (
    KernelQuery,
    expected_exit_time,
    kernel_normalization,
    poisson_kernel,
    rejection_envelope,
    sample_exact,
    sample_exact_batch,
    second_moment_identity_check,
    theoretical_mean,
    theoretical_trace,
)
from .stats import ComparisonRow, SummaryStats, TableConfig, compare, reproduce_table1, summarize
from .privacy import CloakScenario, PrivacyReport, privacy_curve, run_attack, run_attacks

__all__ = [
    "__version__",
    "Ball", "BoxDomain", "Domain",
    "ExitBatch", "ExitSample",
    "RngStream", "gaussian_vector", "uniform_on_sphere",
    "BrownianConfig", "MaxStepsExceeded", "simulate_exit", "simulate_exit_batch",
    "HopProfile", "MaxHopsExceeded", "WosConfig", "hop_count_profile",
    "wos_exit", "wos_exit_batch",
    "KernelQuery", "expected_exit_time", "kernel_normalization", "poisson_kernel",
    "rejection_envelope", "sample_exact", "sample_exact_batch",
    "second_moment_identity_check", "theoretical_mean", "theoretical_trace",
    "ComparisonRow", "SummaryStats", "TableConfig", "compare", "reproduce_table1",
    "summarize",
    "CloakScenario", "PrivacyReport", "privacy_curve", "run_attack", "run_attacks",
]
