"""Finite-blocklength per-user error bounds and energy-per-bit optimization
for asynchronous unsourced multiple access."""

from .aloha import AlohaConfig, aloha_min_ebn0, choose_v
from .bounds import (
    BoundReport,
    WorstCaseCertificate,
    p0,
    synchronous_bound,
    theorem1_bound,
    theorem2_bound,
)
from .exponent import (
    ExponentEval,
    exponent,
    exponent_d1,
    exponent_d2,
    g2,
    log_g1,
    mgf_range,
)
from .model import (
    DelayVector,
    OverlapProfile,
    SystemParams,
    overlap_profile,
    worst_case_profile,
)
from .montecarlo import PupeEstimate, SimConfig, derive_trial_seed, simulate_pupe
from .optimizer import EnergyPoint, min_bound_over_backoff, min_ebn0, sweep
from .roots import (
    SaddlepointSolution,
    ThresholdPair,
    solve_t0,
    solve_t_bar,
    solve_t_under,
    t_star,
)

__version__ = "0.1.0"

__all__ = [
    "AlohaConfig",
    "BoundReport",
    "DelayVector",
    "EnergyPoint",
    "ExponentEval",
    "OverlapProfile",
    "PupeEstimate",
    "SaddlepointSolution",
    "SimConfig",
    "SystemParams",
    "ThresholdPair",
    "WorstCaseCertificate",
    "aloha_min_ebn0",
    "choose_v",
    "derive_trial_seed",
    "exponent",
    "exponent_d1",
    "exponent_d2",
    "g2",
    "log_g1",
    "mgf_range",
    "min_bound_over_backoff",
    "min_ebn0",
    "overlap_profile",
    "p0",
    "simulate_pupe",
    "solve_t0",
    "solve_t_bar",
    "solve_t_under",
    "sweep",
    "synchronous_bound",
    "t_star",
    "theorem1_bound",
    "theorem2_bound",
    "worst_case_profile",
]
