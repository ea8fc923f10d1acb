"""Tilted exponent of the decoding-error tail and its derivatives.

For a profile a^n and tilt t in (0,1), the exponent is

    E(a^n, t) = (1/2) sum_i [ t*log(1 + a_i*P) + log(1 - a_i*P*t^2/(1 + a_i*P)) ].

With c = a*P the per-entry derivatives reduce to

    E'(t)  = (1/2) [ log(1+c) - 2*c*t / (1 + c - c*t^2) ]
    E''(t) = -(c + c^2 + c^2*t^2) / (1 + c - c*t^2)^2

(the 1/2 prefactor cancels against the chain rule in E''; the scale is
pinned by the finite-difference checks in the test suite, not by trusting
transcription).  All sums run over RLE runs, so cost is independent of n.

``log_g1`` stays in log domain throughout: with payloads of 100 nats and
error sets up to 160 users the exponent reaches magnitude ~1e4 and a direct
exp would overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import OverlapProfile

T_CLAMP = 1e-12  # open-interval endpoints of (0,1) are handled via this clamp


class DegenerateProfileError(ValueError):
    """Raised when an operation needs at least one positive profile entry."""


@dataclass(frozen=True)
class ExponentEval:
    """E and its first two t-derivatives at one tilt."""

    t: float
    e: float
    e1: float
    e2: float


def _check_t(profile: OverlapProfile, t: float, p: float) -> None:
    if p <= 0:
        raise ValueError(f"power p must be positive, got {p}")
    for _, a in profile.runs:
        if a == 0:
            continue
        c = a * p
        if t * t >= (1.0 + c) / c or t <= -(1.0 + c) / c:
            raise ValueError(
                f"t={t} outside the tilt convergence range for run value {a}"
            )


def mgf_range(a: int, p: float) -> tuple[float, float]:
    """Open interval of tilts where the per-use moment generating function converges.

    For a >= 1 the upper end sqrt((1+aP)/(aP)) is always >= 1, so (0,1) is
    inside; an idle channel use (a = 0) converges everywhere.
    """
    if a < 0:
        raise ValueError("run value must be non-negative")
    if a == 0:
        return (-math.inf, math.inf)
    c = a * p
    return (-(1.0 + c) / c, math.sqrt((1.0 + c) / c))


def exponent(profile: OverlapProfile, t: float, p: float) -> float:
    """E(a^n, t); zero-activity runs contribute nothing."""
    _check_t(profile, t, p)
    total = 0.0
    for length, a in profile.runs:
        if a == 0:
            continue
        c = a * p
        total += length * (t * math.log1p(c) + math.log1p(-c * t * t / (1.0 + c)))
    return 0.5 * total


def exponent_d1(profile: OverlapProfile, t: float, p: float) -> float:
    """First t-derivative of E; strictly decreasing in t on nonzero profiles."""
    _check_t(profile, t, p)
    total = 0.0
    for length, a in profile.runs:
        if a == 0:
            continue
        c = a * p
        total += length * (math.log1p(c) - 2.0 * c * t / (1.0 + c - c * t * t))
    return 0.5 * total


def exponent_d2(profile: OverlapProfile, t: float, p: float) -> float:
    """Second t-derivative of E; <= 0 whenever the profile has a positive entry."""
    _check_t(profile, t, p)
    total = 0.0
    for length, a in profile.runs:
        if a == 0:
            continue
        c = a * p
        den = 1.0 + c - c * t * t
        total += length * (c + c * c + c * c * t * t) / (den * den)
    return -total


def evaluate(profile: OverlapProfile, t: float, p: float) -> ExponentEval:
    return ExponentEval(
        t=t,
        e=exponent(profile, t, p),
        e1=exponent_d1(profile, t, p),
        e2=exponent_d2(profile, t, p),
    )


def log_g1(profile: OverlapProfile, t: float, p: float, log_count: float) -> float:
    """t*log_count - E(a^n, t), never exponentiated inside the library.

    ``log_count`` is |S|*log_m for the asynchronous bound or the log-binomial
    payload count of the synchronous variant.
    """
    return t * log_count - exponent(profile, t, p)


def g2(profile: OverlapProfile, t: float, p: float) -> float:
    """Curvature factor 1 / (t*(1-t)*sqrt(-E''(t))); positive and finite.

    Undefined on all-zero profiles (E'' = 0) and at the poles t -> 0, 1.
    """
    if profile.is_zero():
        raise DegenerateProfileError("g2 is undefined on an all-zero profile")
    if not T_CLAMP <= t <= 1.0 - T_CLAMP:
        raise ValueError(f"t={t} outside [{T_CLAMP}, 1-{T_CLAMP}] (pole of 1/(t(1-t)))")
    e2 = exponent_d2(profile, t, p)
    return 1.0 / (t * (1.0 - t) * math.sqrt(-e2))


def log_g2(profile: OverlapProfile, t: float, p: float) -> float:
    """log of g2, for log-sum-exp accumulation of bound terms."""
    if profile.is_zero():
        raise DegenerateProfileError("g2 is undefined on an all-zero profile")
    if not T_CLAMP <= t <= 1.0 - T_CLAMP:
        raise ValueError(f"t={t} outside [{T_CLAMP}, 1-{T_CLAMP}] (pole of 1/(t(1-t)))")
    e2 = exponent_d2(profile, t, p)
    return -math.log(t) - math.log1p(-t) - 0.5 * math.log(-e2)


# ---------------------------------------------------------------------------
# Vectorized kernels over stacked run arrays.
#
# The worst-case and synchronous assemblies solve one root problem per
# (cardinality, first-arrival flag) pair; profiles there have at most two
# runs, so the whole family is evaluated as numpy ops over (q, r) arrays of
# run lengths/values with per-problem tilts t of shape (q,).
# ---------------------------------------------------------------------------


def e_kernel(lens: np.ndarray, vals: np.ndarray, p: float, t: np.ndarray) -> np.ndarray:
    c = vals * p
    tt = t[:, None] ** 2
    return 0.5 * np.sum(
        lens * (t[:, None] * np.log1p(c) + np.log1p(-c * tt / (1.0 + c))), axis=-1
    )


def e1_kernel(lens: np.ndarray, vals: np.ndarray, p: float, t: np.ndarray) -> np.ndarray:
    c = vals * p
    tt = t[:, None] ** 2
    return 0.5 * np.sum(
        lens * (np.log1p(c) - 2.0 * c * t[:, None] / (1.0 + c - c * tt)), axis=-1
    )


def e2_kernel(lens: np.ndarray, vals: np.ndarray, p: float, t: np.ndarray) -> np.ndarray:
    c = vals * p
    tt = t[:, None] ** 2
    den = 1.0 + c - c * tt
    return -np.sum(lens * (c + c * c + c * c * tt) / (den * den), axis=-1)
