"""T-fold slotted ALOHA wrapper around the bound engine.

The frame of n channel uses is split into V subblocks; each user picks one
subblock and a slot decodes against a design count of ``t_fold`` users.  A
user collides when its slot holds at least ``t_fold`` *other* users, so the
per-user collision probability is the upper tail of Binomial(ka-1, 1/V).
V is chosen minimal with that tail below 0.9 * epsilon, and the remaining
budget feeds the per-slot worst-case bound at blocklength n/V.

Energy accounting: a user transmits only during its own subblock, so
energy-per-bit is n_sub * P' / log_m (the per-slot search reports exactly
this since its blocklength is n_sub).  The slot decoder designs for the
fixed count ``t_fold`` rather than the realized occupancy; decoding against
realized occupancy would be the alternative reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import SystemParams
from .optimizer import (
    DEFAULT_CAP_DB,
    DEFAULT_FLOOR_DB,
    DEFAULT_REL_TOL,
    EnergyPoint,
    min_ebn0,
)
from . import bounds
from .special import log_binom_tail

VARIANT_ALOHA = "aloha16"


class BudgetUnattainableError(ValueError):
    """No subblock count within the frame meets the collision budget."""


@dataclass(frozen=True)
class AlohaConfig:
    t_fold: int
    v: int
    n_sub: int
    collision_prob: float
    residual_epsilon: float


def collision_probability(ka: int, t_fold: int, v: int) -> float:
    """Pr(Binomial(ka-1, 1/v) >= t_fold): slot holds t_fold or more others."""
    if ka - 1 < t_fold:
        return 0.0
    if v == 1:
        return 1.0
    log_p = -math.log(v)
    log_q = math.log1p(-1.0 / v)
    return math.exp(log_binom_tail(ka - 1, log_p, log_q, t_fold))


def choose_v(ka: int, epsilon: float, t_fold: int, n: int) -> AlohaConfig:
    """Smallest subblock count keeping the collision budget under 0.9*epsilon."""
    if t_fold < 1:
        raise ValueError("t_fold must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0,1)")
    budget = 0.9 * epsilon
    if ka - 1 < t_fold:
        return AlohaConfig(t_fold, 1, n, 0.0, epsilon)
    if collision_probability(ka, t_fold, n) >= budget:
        raise BudgetUnattainableError(
            f"no subblock count V <= n={n} meets the collision budget "
            f"{budget} for ka={ka}, t_fold={t_fold}"
        )
    # collision probability is decreasing in v; binary search the threshold
    lo, hi = 1, n  # lo violates the budget (v=1 collides surely here), hi meets it
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if collision_probability(ka, t_fold, mid) < budget:
            hi = mid
        else:
            lo = mid
    v = hi
    cp = collision_probability(ka, t_fold, v)
    n_sub = n // v
    if n_sub < 1:
        raise ValueError(f"V={v} leaves an empty subblock for n={n}")
    return AlohaConfig(t_fold, v, n_sub, cp, epsilon - cp)


def aloha_min_ebn0(
    params: SystemParams,
    config: AlohaConfig,
    cap_db: float = DEFAULT_CAP_DB,
    floor_db: float = DEFAULT_FLOOR_DB,
    rel_tol: float = DEFAULT_REL_TOL,
) -> EnergyPoint:
    """Minimum energy-per-bit of the T-fold scheme at this operating point.

    Runs the worst-case per-slot bound at blocklength n_sub with user count
    t_fold and PUPE target epsilon - collision_prob; V = 1 reduces exactly to
    the plain search at the residual target.
    """
    sub = replace(params, n=config.n_sub, ka=config.t_fold)
    point = min_ebn0(
        sub,
        config.residual_epsilon,
        bounds.theorem2_bound,
        VARIANT_ALOHA,
        cap_db=cap_db,
        floor_db=floor_db,
        rel_tol=rel_tol,
    )
    # report under the frame's user count; energy numbers are per-subblock
    return replace(point, ka=params.ka, alpha=params.alpha, variant=VARIANT_ALOHA)
