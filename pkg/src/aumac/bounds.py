"""Assembly of the per-user error bounds.

Three variants share the additive structure  p0 + sum of tail terms:

  * ``theorem1_bound``: exact enumeration over all nonempty error sets,
    each with its own overlap profile from the given delay vector.  Cost is
    exponential in the user count, guarded at 20 users by default.
  * ``synchronous_bound``: zero-delay special case with the tighter
    log-binomial payload count; one term per cardinality.
  * ``theorem2_bound``: delay-uniform worst case; per cardinality and
    first-arrival flag, a certificate (worst-case profile, saddlepoint tilt,
    two threshold tilts, curvature floor) whose side conditions make the
    bound valid for every delay vector within the budget.

All tail terms are accumulated in log domain and exponentiated once.  A
failed side condition yields an *invalid* report rather than a clamp to 1:
clamping would hide the applicability boundary from the energy optimizer.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import roots
from .exponent import T_CLAMP, e1_kernel, e2_kernel, e_kernel, log_g1, log_g2
from .model import DelayVector, OverlapProfile, SystemParams, overlap_profile, worst_case_profile
from .roots import bisect_vec, solve_t0
from .special import chi2_upper_tail, log_comb, log_comb_large_m, logsumexp_sorted

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

VARIANT_THM1_ASYNC = "thm1_async"
VARIANT_THM1_SYNC = "thm1_sync"
VARIANT_THM2 = "thm2_worst_case"

MODE_POWER_OF_M = "power_of_m"
MODE_SYNC_BINOMIAL = "sync_binomial"

DEFAULT_SUBSET_GUARD = 20


@dataclass(frozen=True)
class WorstCaseCertificate:
    """Per (cardinality, first-arrival flag) worst-case evidence for theorem2_bound."""

    k: int
    iota: int
    profile: OverlapProfile
    t0: float | None
    t_bar: float | None
    t_under: float | None
    t_star: float | None
    valid: bool
    failure: str | None
    log_term: float
    residual_t0: float | None
    residual_bar: float | None
    residual_under: float | None


@dataclass(frozen=True)
class BoundReport:
    """Assembled bound with per-cardinality breakdown.

    ``per_cardinality`` rows are (k, iota_or_None, log_term, status).  For an
    invalid report ``total`` is +inf so it can never be mistaken for a
    probability; the optimizer treats invalid as "constraint unmet".
    """

    variant: str
    total: float
    clamped: float
    p0_collision: float
    p0_power: float
    valid: bool
    failure: str | None
    per_cardinality: tuple[tuple[int, int | None, float, str], ...]
    max_root_residual: float
    certificates: tuple[WorstCaseCertificate, ...] | None = None

    def serialize(self) -> str:
        """Flat record: variant,total,clamped,p0_collision,p0_power,valid,failure."""
        return ",".join(
            [
                self.variant,
                repr(self.total),
                repr(self.clamped),
                repr(self.p0_collision),
                repr(self.p0_power),
                "valid" if self.valid else "invalid",
                self.failure or "",
            ]
        )


def p0(params: SystemParams) -> tuple[float, float]:
    """Collision and power-violation floor of every bound variant.

    The collision part ka*(ka-1)/(2M) is evaluated as exp(log(...) - log_m)
    since M is never materialized.  The power part is ka times the upper tail
    of chi-square with n degrees of freedom at n*p_prime/p (codeword norms
    scale as p times a chi-square).
    """
    if params.ka < 2:
        collision = 0.0
    else:
        collision = math.exp(
            math.log(params.ka * (params.ka - 1) / 2.0) - params.log_m
        )
    power = params.ka * chi2_upper_tail(params.n, params.n * params.p_prime / params.p)
    return collision, power


def _invalid_report(variant, p0c, p0p, failure, per_card=(), max_res=0.0, certs=None):
    return BoundReport(
        variant=variant,
        total=math.inf,
        clamped=1.0,
        p0_collision=p0c,
        p0_power=p0p,
        valid=False,
        failure=failure,
        per_cardinality=tuple(per_card),
        max_root_residual=max_res,
        certificates=certs,
    )


def theorem1_bound(
    params: SystemParams,
    delays: DelayVector,
    mode: str = MODE_POWER_OF_M,
    subset_guard: int = DEFAULT_SUBSET_GUARD,
) -> BoundReport:
    """Exact bound for a known delay vector, enumerating all error sets.

    ``mode`` selects the payload count per error set: ``power_of_m`` uses
    |S|*log_m, ``sync_binomial`` the log-binomial count of the synchronous
    variant (which requires an all-zero delay vector).  Subsets sharing a
    delay multiset share a tail term, so the zero-delay case collapses to
    one solve per cardinality.
    """
    if params.ka > subset_guard:
        raise ValueError(
            f"ka={params.ka} exceeds the enumeration guard ({subset_guard}): "
            f"2^ka - 1 error sets is beyond desk scale; use theorem2_bound or "
            f"synchronous_bound instead"
        )
    delays.validate_against(params)
    if mode == MODE_SYNC_BINOMIAL:
        if any(d != 0 for d in delays.delays):
            raise ValueError("sync_binomial mode requires an all-zero delay vector")
        variant = VARIANT_THM1_SYNC
    elif mode == MODE_POWER_OF_M:
        variant = VARIANT_THM1_ASYNC
    else:
        raise ValueError(f"unknown payload count mode {mode!r}")

    p0c, p0p = p0(params)
    ka, n, p = params.ka, params.n, params.p
    max_res = 0.0
    per_card: list[tuple[int, int | None, float, str]] = []
    log_terms: list[float] = []
    for k in range(1, ka + 1):
        if mode == MODE_POWER_OF_M:
            log_count = k * params.log_m
        else:
            log_count = log_comb_large_m(params.log_m, ka, k)
        groups = Counter(
            delays.restrict(s) for s in itertools.combinations(range(1, ka + 1), k)
        )
        k_terms = []
        for delay_tuple, count in sorted(groups.items()):
            profile = overlap_profile(delay_tuple, n)
            sol = solve_t0(profile, p, log_count)
            if not sol.found:
                return _invalid_report(
                    variant,
                    p0c,
                    p0p,
                    f"saddlepoint {sol.status.value} for k={k}, delays={delay_tuple}",
                    per_card,
                    max_res,
                )
            max_res = max(max_res, sol.residual)
            term = (
                math.log(count)
                + math.log(k)
                - math.log(ka)
                - LOG_SQRT_2PI
                + log_g1(profile, sol.t0, p, log_count)
                + log_g2(profile, sol.t0, p)
            )
            k_terms.append(term)
        lse_k = logsumexp_sorted(k_terms)
        per_card.append((k, None, lse_k, "found"))
        log_terms.extend(k_terms)

    total = p0c + p0p + math.exp(logsumexp_sorted(log_terms))
    return BoundReport(
        variant=variant,
        total=total,
        clamped=min(1.0, total),
        p0_collision=p0c,
        p0_power=p0p,
        valid=True,
        failure=None,
        per_cardinality=tuple(per_card),
        max_root_residual=max_res,
    )


def subset_log_terms(
    params: SystemParams, delays: DelayVector, mode: str = MODE_POWER_OF_M
) -> list[tuple[tuple[int, ...], int, float]]:
    """Per delay-multiset (delays, multiplicity, log term) rows of theorem1_bound.

    Exposed for tests probing the loss of permutation invariance under
    nonzero delays.
    """
    rows = []
    for k in range(1, params.ka + 1):
        if mode == MODE_POWER_OF_M:
            log_count = k * params.log_m
        else:
            log_count = log_comb_large_m(params.log_m, params.ka, k)
        groups = Counter(
            delays.restrict(s)
            for s in itertools.combinations(range(1, params.ka + 1), k)
        )
        for delay_tuple, count in sorted(groups.items()):
            profile = overlap_profile(delay_tuple, params.n)
            sol = solve_t0(profile, params.p, log_count)
            if not sol.found:
                raise ValueError(f"infeasible saddlepoint for delays {delay_tuple}")
            term = (
                math.log(k)
                - math.log(params.ka)
                - LOG_SQRT_2PI
                + log_g1(profile, sol.t0, params.p, log_count)
                + log_g2(profile, sol.t0, params.p)
            )
            rows.append((delay_tuple, count, term))
    return rows


def synchronous_bound(params: SystemParams) -> BoundReport:
    """Zero-delay bound with log-binomial payload counts, one term per cardinality."""
    ka, n, p = params.ka, params.n, params.p
    p0c, p0p = p0(params)
    ks = np.arange(1, ka + 1)
    lens = np.full((ka, 1), float(n))
    vals = ks.astype(float)[:, None]
    targets = np.array([log_comb_large_m(params.log_m, ka, int(k)) for k in ks])

    e1_lo = e1_kernel(lens, vals, p, np.full(ka, T_CLAMP))
    e1_hi = e1_kernel(lens, vals, p, np.full(ka, 1.0 - T_CLAMP))
    feasible = (e1_lo > targets) & (e1_hi < targets)
    if not feasible.all():
        bad = int(ks[~feasible][0])
        status = (
            "infeasible_high"
            if targets[~feasible][0] >= e1_lo[~feasible][0]
            else "infeasible_low"
        )
        return _invalid_report(
            VARIANT_THM1_SYNC, p0c, p0p, f"saddlepoint {status} for k={bad}"
        )

    t0s, _, residuals = roots.solve_t0_vec(lens, vals, p, targets)
    e_at = e_kernel(lens, vals, p, t0s)
    e2_at = e2_kernel(lens, vals, p, t0s)
    log_terms = (
        np.array([log_comb(ka, int(k)) for k in ks])
        + np.log(ks)
        - math.log(ka)
        - LOG_SQRT_2PI
        + t0s * targets
        - e_at
        - np.log(t0s)
        - np.log1p(-t0s)
        - 0.5 * np.log(-e2_at)
    )
    per_card = tuple(
        (int(k), None, float(lt), "found") for k, lt in zip(ks, log_terms)
    )
    total = p0c + p0p + math.exp(logsumexp_sorted(log_terms.tolist()))
    return BoundReport(
        variant=VARIANT_THM1_SYNC,
        total=total,
        clamped=min(1.0, total),
        p0_collision=p0c,
        p0_power=p0p,
        valid=True,
        failure=None,
        per_cardinality=per_card,
        max_root_residual=float(residuals.max()),
    )


def _lhs_bar_kernel(lens, vals, p, t):
    c = vals * p
    tt = t[:, None] ** 2
    return np.sum(lens * c * t[:, None] / (1.0 + c * (1.0 - tt)), axis=-1)


def theorem2_bound(params: SystemParams) -> BoundReport:
    """Delay-uniform worst-case bound over all delay vectors within the budget.

    One certificate per (cardinality k, first-arrival flag iota); the iota=0
    class is empty at k = ka (the full error set always contains the first
    arrival) and is skipped.  Any failed side condition on a nonempty class
    invalidates the whole report, naming the failing pair.
    """
    ka, n, p, log_m = params.ka, params.n, params.p, params.log_m
    d_max = params.d_max
    p0c, p0p = p0(params)

    pairs = [(k, 1) for k in range(1, ka + 1)] + [(k, 0) for k in range(1, ka)]
    pairs.sort()
    q = len(pairs)
    k_arr = np.array([k for k, _ in pairs], dtype=float)
    iota_arr = np.array([i for _, i in pairs], dtype=float)
    lens = np.column_stack(
        [np.full(q, float(d_max)), np.full(q, float(n - d_max))]
    )
    vals = np.column_stack([iota_arr, k_arr])
    targets = k_arr * log_m

    # Cheap existence pre-checks before any bisection: deep in the
    # infeasible-power regime (every expanding step of the energy search)
    # this rejects the point at the cost of a few kernel evaluations.
    t_lo = np.full(q, T_CLAMP)
    t_hi = np.full(q, 1.0 - T_CLAMP)
    rhs_bar = 0.5 * n * np.log1p(k_arr * p) - targets
    c_k = k_arr * p
    rhs_under = 0.5 * np.sum(lens * np.log1p(vals * p), axis=-1) - targets

    def lhs_under(t):
        return n * c_k * t / (1.0 + c_k * (1.0 - t * t))

    pre_t0 = (e1_kernel(lens, vals, p, t_lo) > targets) & (
        e1_kernel(lens, vals, p, t_hi) < targets
    )
    pre_bar = (rhs_bar > _lhs_bar_kernel(lens, vals, p, t_lo)) & (
        rhs_bar < _lhs_bar_kernel(lens, vals, p, t_hi)
    )
    pre_under = (rhs_under > lhs_under(t_lo)) & (rhs_under < lhs_under(t_hi))
    if not (pre_t0 & pre_bar & pre_under).all():
        certificates = []
        failure = None
        for idx, (k, iota) in enumerate(pairs):
            if pre_t0[idx] and pre_bar[idx] and pre_under[idx]:
                continue  # roots never solved on the short-circuit path
            if not pre_t0[idx]:
                reason = "saddlepoint infeasible"
            elif not pre_bar[idx]:
                reason = "upper threshold absent"
            else:
                reason = "lower threshold absent"
            if failure is None:
                failure = f"k={k}, iota={iota}: {reason}"
            certificates.append(
                WorstCaseCertificate(
                    k=k,
                    iota=iota,
                    profile=worst_case_profile(k, iota, n, d_max),
                    t0=None,
                    t_bar=None,
                    t_under=None,
                    t_star=None,
                    valid=False,
                    failure=reason,
                    log_term=math.nan,
                    residual_t0=None,
                    residual_bar=None,
                    residual_under=None,
                )
            )
        per_card = tuple(
            (c.k, c.iota, c.log_term, c.failure or "invalid") for c in certificates
        )
        return _invalid_report(
            VARIANT_THM2, p0c, p0p, failure, per_card, 0.0, tuple(certificates)
        )

    # saddlepoint tilt of each worst-case profile
    t0s, t0_ok, t0_res = roots.solve_t0_vec(lens, vals, p, targets)

    # upper threshold
    tbar, bar_ok = bisect_vec(
        lambda t: _lhs_bar_kernel(lens, vals, p, t) - rhs_bar, q, decreasing=False
    )
    bar_res = np.abs(_lhs_bar_kernel(lens, vals, p, tbar) - rhs_bar)

    # lower threshold
    tund, und_ok = bisect_vec(lambda t: lhs_under(t) - rhs_under, q, decreasing=False)
    und_res = np.abs(lhs_under(tund) - rhs_under)

    ordering = (tund <= t0s + roots.ORDERING_TOL) & (t0s <= tbar + roots.ORDERING_TOL)
    valid = t0_ok & bar_ok & und_ok & ordering

    t_star = np.minimum(tund - tund**2, tbar - tbar**2)
    e_at_t0 = e_kernel(lens, vals, p, t0s)
    e2_at_under = e2_kernel(lens, vals, p, tund)
    log_c = np.array([log_comb(ka - 1, k - i) for k, i in pairs])
    with np.errstate(invalid="ignore", divide="ignore"):
        log_terms = (
            log_c
            + np.log(k_arr)
            + t0s * targets
            - e_at_t0
            - np.log(t_star)
            - 0.5 * np.log(-e2_at_under)
        )

    certificates = []
    failure = None
    for idx, (k, iota) in enumerate(pairs):
        ok = bool(valid[idx])
        fail_reason = None
        if not ok:
            if not t0_ok[idx]:
                fail_reason = "saddlepoint infeasible"
            elif not bar_ok[idx]:
                fail_reason = "upper threshold absent"
            elif not und_ok[idx]:
                fail_reason = "lower threshold absent"
            else:
                fail_reason = "ordering t_under <= t0 <= t_bar violated"
            if failure is None:
                failure = f"k={k}, iota={iota}: {fail_reason}"
        certificates.append(
            WorstCaseCertificate(
                k=k,
                iota=iota,
                profile=worst_case_profile(k, iota, n, d_max),
                t0=float(t0s[idx]) if t0_ok[idx] else None,
                t_bar=float(tbar[idx]) if bar_ok[idx] else None,
                t_under=float(tund[idx]) if und_ok[idx] else None,
                t_star=float(t_star[idx]) if (bar_ok[idx] and und_ok[idx]) else None,
                valid=ok,
                failure=fail_reason,
                log_term=float(log_terms[idx]) if ok else math.nan,
                residual_t0=float(t0_res[idx]) if t0_ok[idx] else None,
                residual_bar=float(bar_res[idx]) if bar_ok[idx] else None,
                residual_under=float(und_res[idx]) if und_ok[idx] else None,
            )
        )

    per_card = tuple(
        (c.k, c.iota, c.log_term, "found" if c.valid else (c.failure or "invalid"))
        for c in certificates
    )
    found_res = [r for c in certificates for r in (c.residual_t0, c.residual_bar, c.residual_under) if r is not None]
    max_res = max(found_res) if found_res else 0.0

    if failure is not None:
        return _invalid_report(
            VARIANT_THM2, p0c, p0p, failure, per_card, max_res, tuple(certificates)
        )

    scaled = [
        float(lt) - math.log(ka) - LOG_SQRT_2PI for lt in log_terms
    ]
    total = p0c + p0p + math.exp(logsumexp_sorted(scaled))
    return BoundReport(
        variant=VARIANT_THM2,
        total=total,
        clamped=min(1.0, total),
        p0_collision=p0c,
        p0_power=p0p,
        valid=True,
        failure=None,
        per_cardinality=per_card,
        max_root_residual=max_res,
        certificates=tuple(certificates),
    )
