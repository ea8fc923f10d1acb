"""Scalar root equations of the bound: saddlepoint tilt and threshold tilts.

Three monotone equations are solved on the open interval (0,1):

  * saddlepoint t0:  E'(a^n, t) = target            (E' strictly decreasing)
  * upper threshold: sum_i a_i*P*t/(1+a_i*P*(1-t^2)) = (n/2)log(1+kP) - target
  * lower threshold: k*n*P*t/(1+k*P*(1-t^2)) = (1/2)sum_i log(1+a_i*P) - target

Bisection is the primary solver: every left side is monotone with cheap
evaluations, so guaranteed convergence beats quadratic speed at these sizes.
The iteration cap (200) drives the interval far below double resolution;
the residual recorded on each solution is the authoritative acceptance.
Roots that converge onto the clamped endpoints are reported absent since the
bound requires interior membership.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exponent import (
    DegenerateProfileError,
    ExponentEval,
    T_CLAMP,
    e1_kernel,
    evaluate,
    exponent_d1,
)
from .model import OverlapProfile

MAX_ITER = 200


class RootStatus(enum.Enum):
    FOUND = "found"
    INFEASIBLE_HIGH = "infeasible_high"  # target >= E'(0+): error probability ~ 1
    INFEASIBLE_LOW = "infeasible_low"  # target <= E'(1-): tilt would exceed 1


@dataclass(frozen=True)
class SaddlepointSolution:
    t0: float | None
    eval: ExponentEval | None
    status: RootStatus
    residual: float | None

    @property
    def found(self) -> bool:
        return self.status is RootStatus.FOUND


@dataclass(frozen=True)
class ThresholdPair:
    """Threshold roots and the curvature floor T* = min(t - t^2) over them.

    ``ordering_ok`` carries the side condition t_under <= t0 <= t_bar (with a
    1e-9 slack for float coincidence of the three roots at alpha = 0).
    """

    t_bar: float | None
    t_under: float | None
    t_star: float | None
    ordering_ok: bool


ORDERING_TOL = 1e-9


def _bisect_scalar(g, lo: float, hi: float, lo_positive: bool) -> float:
    """Root of monotone g with sign(g(lo)) != sign(g(hi)); 200-iteration cap."""
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (g(mid) > 0.0) == lo_positive:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_t0(profile: OverlapProfile, p: float, target: float) -> SaddlepointSolution:
    """Tilt where E'(a^n, t) meets the payload target, if it exists in (0,1)."""
    if profile.is_zero():
        raise DegenerateProfileError("saddlepoint undefined on an all-zero profile")
    if not target > 0:
        raise ValueError(f"target must be positive, got {target}")
    lo, hi = T_CLAMP, 1.0 - T_CLAMP
    e1_lo = exponent_d1(profile, lo, p)
    e1_hi = exponent_d1(profile, hi, p)
    if target >= e1_lo:
        return SaddlepointSolution(None, None, RootStatus.INFEASIBLE_HIGH, None)
    if target <= e1_hi:
        return SaddlepointSolution(None, None, RootStatus.INFEASIBLE_LOW, None)
    t0 = _bisect_scalar(
        lambda t: exponent_d1(profile, t, p) - target, lo, hi, lo_positive=True
    )
    ev = evaluate(profile, t0, p)
    return SaddlepointSolution(t0, ev, RootStatus.FOUND, abs(ev.e1 - target))


def _threshold_lhs_bar(profile: OverlapProfile, p: float, t: float) -> float:
    total = 0.0
    for length, a in profile.runs:
        if a == 0:
            continue
        c = a * p
        total += length * c * t / (1.0 + c * (1.0 - t * t))
    return total


def _threshold_lhs_under(k: int, n: int, p: float, t: float) -> float:
    c = k * p
    return n * c * t / (1.0 + c * (1.0 - t * t))


def _solve_increasing(lhs, rhs: float) -> tuple[float | None, float | None]:
    """Root of increasing lhs(t) = rhs on the clamped open interval, or absent."""
    lo, hi = T_CLAMP, 1.0 - T_CLAMP
    if rhs <= lhs(lo) or rhs >= lhs(hi):
        return None, None
    root = _bisect_scalar(lambda t: lhs(t) - rhs, lo, hi, lo_positive=False)
    return root, abs(lhs(root) - rhs)


def solve_t_bar(
    profile: OverlapProfile, p: float, k: int, n: int, log_m: float
) -> tuple[float | None, float | None]:
    """Upper threshold root for a worst-case profile, with its residual."""
    rhs = 0.5 * n * math.log1p(k * p) - k * log_m
    return _solve_increasing(lambda t: _threshold_lhs_bar(profile, p, t), rhs)


def solve_t_under(
    profile: OverlapProfile, p: float, k: int, n: int, log_m: float
) -> tuple[float | None, float | None]:
    """Lower threshold root for a worst-case profile, with its residual."""
    rhs = -k * log_m
    for length, a in profile.runs:
        if a > 0:
            rhs += 0.5 * length * math.log1p(a * p)
    return _solve_increasing(lambda t: _threshold_lhs_under(k, n, p, t), rhs)


def t_star(pair: ThresholdPair) -> float | None:
    """min(t_under - t_under^2, t_bar - t_bar^2); absent if either root is."""
    if pair.t_bar is None or pair.t_under is None:
        return None
    return min(pair.t_under - pair.t_under**2, pair.t_bar - pair.t_bar**2)


def threshold_pair(
    t_bar: float | None, t_under: float | None, t0: float | None
) -> ThresholdPair:
    ordering = (
        t_bar is not None
        and t_under is not None
        and t0 is not None
        and t_under <= t0 + ORDERING_TOL
        and t0 <= t_bar + ORDERING_TOL
    )
    star = None
    if t_bar is not None and t_under is not None:
        star = min(t_under - t_under**2, t_bar - t_bar**2)
    return ThresholdPair(t_bar, t_under, star, ordering)


# ---------------------------------------------------------------------------
# Vectorized bisection over families of monotone problems (one per
# cardinality/flag pair).  Problems whose bracket does not contain a root get
# arbitrary outputs; callers mask them via the returned feasibility array.
# ---------------------------------------------------------------------------


def bisect_vec(g, n_problems: int, decreasing: bool) -> tuple[np.ndarray, np.ndarray]:
    """Roots of q monotone scalar equations g(t) = 0, t in the clamped (0,1).

    ``g`` maps a (q,) tilt array to a (q,) value array.  Returns (roots,
    feasible) where feasible marks problems with a sign change across the
    bracket.
    """
    lo = np.full(n_problems, T_CLAMP)
    hi = np.full(n_problems, 1.0 - T_CLAMP)
    g_lo = g(lo)
    g_hi = g(hi)
    if decreasing:
        feasible = (g_lo > 0.0) & (g_hi < 0.0)
    else:
        feasible = (g_lo < 0.0) & (g_hi > 0.0)
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        stalled = (mid <= lo) | (mid >= hi)
        if stalled.all():
            break
        g_mid = g(mid)
        go_right = (g_mid > 0.0) if decreasing else (g_mid < 0.0)
        lo = np.where(go_right & ~stalled, mid, lo)
        hi = np.where(~go_right & ~stalled, mid, hi)
    return 0.5 * (lo + hi), feasible


def solve_t0_vec(
    lens: np.ndarray, vals: np.ndarray, p: float, targets: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized saddlepoint solve; returns (t0, feasible, residuals)."""
    roots, feasible = bisect_vec(
        lambda t: e1_kernel(lens, vals, p, t) - targets, len(targets), decreasing=True
    )
    residuals = np.abs(e1_kernel(lens, vals, p, roots) - targets)
    return roots, feasible, residuals
