"""Built-in invariant suite behind the ``check`` CLI subcommand.

Runs a compressed version of the library's mathematical invariants with no
test-framework or SciPy dependency: finite-difference agreement of the
exponent derivatives, encode/decode round trips, root residuals, the
zero-delay recombination identity, interference monotonicity, and the
closed-form chi-square tails.  Prints one PASS/FAIL line per check and
returns the number of failures.
"""

from __future__ import annotations

import math

import numpy as np

from . import aloha, bounds, roots
from .exponent import exponent, exponent_d1, exponent_d2, log_g1, log_g2
from .model import DelayVector, OverlapProfile, SystemParams, overlap_profile, worst_case_profile
from .special import logsumexp_sorted


def _random_profile(rng) -> OverlapProfile:
    n_runs = int(rng.integers(1, 5))
    vals = np.sort(rng.integers(0, 9, size=n_runs))
    vals[-1] = max(vals[-1], 1)
    lens = rng.integers(1, 30, size=n_runs)
    values = [int(v) for l, v in zip(lens, vals) for _ in range(int(l))]
    return OverlapProfile.from_values(values)


def check_derivatives(rng) -> bool:
    h1 = 1e-6
    h2 = 1e-4  # wider step: the 3-point stencil amplifies roundoff by 1/h^2
    for _ in range(60):
        prof = _random_profile(rng)
        t = float(rng.uniform(0.05, 0.95))
        p = float(np.exp(rng.uniform(np.log(1e-3), np.log(10.0))))
        d1 = exponent_d1(prof, t, p)
        fd1 = (exponent(prof, t + h1, p) - exponent(prof, t - h1, p)) / (2 * h1)
        if abs(d1 - fd1) > 1e-6 * max(1.0, abs(d1)):
            return False
        d2 = exponent_d2(prof, t, p)
        fd2 = (
            exponent(prof, t + h2, p)
            - 2 * exponent(prof, t, p)
            + exponent(prof, t - h2, p)
        ) / (h2 * h2)
        if abs(d2 - fd2) > 1e-5 * max(1.0, abs(d2)):
            return False
    return True


def check_profiles(rng) -> bool:
    for _ in range(50):
        n = int(rng.integers(4, 60))
        k = int(rng.integers(1, 6))
        d_max = int(rng.integers(0, n - 1))
        delays = tuple(sorted(int(d) for d in rng.integers(0, d_max + 1, size=k)))
        prof = overlap_profile(delays, n)
        vals = prof.values()
        if len(vals) != n or vals[-1] != k or prof.serialize() != OverlapProfile.parse(prof.serialize()).serialize():
            return False
        if any(b < a for a, b in zip(vals, vals[1:])):
            return False
        iota = 1 if delays[0] == 0 else 0
        wc = worst_case_profile(k, iota, n, d_max).values()
        if any(w > v for w, v in zip(wc, vals)):
            return False
        if wc[d_max:] != vals[d_max:]:
            return False
    return True


def check_roots(rng) -> bool:
    for _ in range(40):
        prof = _random_profile(rng)
        p = float(rng.uniform(0.05, 4.0))
        t_true = float(rng.uniform(0.1, 0.9))
        target = exponent_d1(prof, t_true, p)
        if target <= 0:
            continue
        sol = roots.solve_t0(prof, p, target)
        if not sol.found or abs(sol.t0 - t_true) > 1e-9 or sol.residual > 1e-9 * max(1.0, target):
            return False
    return True


def check_zero_delay_identity() -> bool:
    params = SystemParams(n=50, log_m=3.0, ka=4, epsilon=1e-3, alpha=0.0, p=0.8, p_prime=1.2)
    t1 = bounds.theorem1_bound(params, DelayVector.zeros(4), bounds.MODE_POWER_OF_M)
    t2 = bounds.theorem2_bound(params)
    if not (t1.valid and t2.valid):
        return False
    return abs(t1.total - t2.total) <= 1e-9 * t1.total


def check_monotonicity(rng) -> bool:
    for _ in range(100):
        prof = _random_profile(rng)
        vals = prof.values()
        i = int(rng.integers(0, len(vals)))
        t = float(rng.uniform(0.05, 0.95))
        p = float(rng.uniform(0.05, 4.0))
        log_count = float(rng.uniform(0.1, 5.0))
        bumped_vals = list(vals)
        bumped_vals[i] += 1
        bumped = OverlapProfile.from_values(bumped_vals)
        before = log_g1(prof, t, p, log_count) + log_g2(prof, t, p)
        after = log_g1(bumped, t, p, log_count) + log_g2(bumped, t, p)
        if after > before + 1e-12:
            return False
    return True


def check_chi2_closed_forms() -> bool:
    # Pr(chi2_2 > x) = exp(-x/2); Pr(chi2_4 > x) = exp(-x/2)(1 + x/2)
    from .special import chi2_upper_tail

    for x in (0.5, 2.0, 9.4877, 30.0):
        if abs(chi2_upper_tail(2, x) - math.exp(-x / 2)) > 1e-12:
            return False
        if abs(chi2_upper_tail(4, x) - math.exp(-x / 2) * (1 + x / 2)) > 1e-12:
            return False
    return True


def check_logsumexp(rng) -> bool:
    vals = list(rng.normal(0, 50, size=200))
    a = logsumexp_sorted(vals)
    b = logsumexp_sorted(list(reversed(vals)))
    rng.shuffle(vals)
    c = logsumexp_sorted(vals)
    return a == b == c


def check_aloha() -> bool:
    cfg = aloha.choose_v(ka=100, epsilon=1e-3, t_fold=16, n=4000)
    if cfg.v > 1 and aloha.collision_probability(100, 16, cfg.v - 1) < 0.9e-3:
        return False
    if aloha.collision_probability(100, 16, cfg.v) >= 0.9e-3:
        return False
    trivial = aloha.choose_v(ka=10, epsilon=1e-3, t_fold=16, n=4000)
    return trivial.v == 1 and trivial.collision_prob == 0.0


CHECKS = (
    ("derivatives-vs-finite-differences", check_derivatives, True),
    ("profile-roundtrip-and-dominance", check_profiles, True),
    ("root-residuals", check_roots, True),
    ("zero-delay-recombination-identity", check_zero_delay_identity, False),
    ("interference-monotonicity", check_monotonicity, True),
    ("chi2-closed-forms", check_chi2_closed_forms, False),
    ("logsumexp-permutation-stability", check_logsumexp, True),
    ("aloha-subblock-minimality", check_aloha, False),
)


def run_all(seed: int = 0, out=print) -> int:
    failures = 0
    for name, fn, needs_rng in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            ok = fn(rng) if needs_rng else fn()
        except Exception as exc:  # a crash is a failure, not an abort
            out(f"FAIL {name}: {exc!r}")
            failures += 1
            continue
        out(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1
    return failures
