"""Desk-scale Monte Carlo oracle for the analytic bounds.

Simulates the shifted-superposition AWGN channel with a fresh i.i.d.
Gaussian codebook per trial (the random-coding ensemble the bounds average
over) and the joint maximum-information-density decoder.  Because the
per-use output density is candidate-independent once the delays are known,
that decoder is equivalent to minimizing the squared distance between the
received word and the superposition of shifted candidate codewords; the
test suite verifies the equivalence explicitly.

Per-user errors follow the full error event: message collision, missing
from the decoded list, or transmitted codeword exceeding the power cap
(power-violating codewords are kept and counted, not resampled).

Trials partition into fixed-size chunks; each trial's randomness comes only
from ``derive_trial_seed``, and the reduction is integer counting, so the
estimate is bit-identical for any parallelism degree.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import DelayVector

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15
CHUNK_TRIALS = 256

MAX_N_SIM = 512
MAX_M_SIM = 256
MAX_KA_SIM = 3
MAX_TUPLES = 1 << 24


@dataclass(frozen=True)
class SimConfig:
    """Small-scale simulation setup; the codebook size here is a real integer,
    unlike the analytic side's log-domain alphabet."""

    n_sim: int
    m_sim: int
    ka_sim: int
    p: float
    p_prime: float
    delays: DelayVector
    trials: int
    seed: int
    noise_std: float = 1.0  # unit noise is the channel; scaling is test plumbing

    def __post_init__(self):
        if not 1 <= self.n_sim <= MAX_N_SIM:
            raise ValueError(f"n_sim must lie in [1, {MAX_N_SIM}]")
        if not 2 <= self.m_sim <= MAX_M_SIM:
            raise ValueError(f"m_sim must lie in [2, {MAX_M_SIM}]")
        if not 1 <= self.ka_sim <= MAX_KA_SIM:
            raise ValueError(f"ka_sim must lie in [1, {MAX_KA_SIM}]")
        if self.m_sim**self.ka_sim > MAX_TUPLES:
            raise ValueError(
                f"m_sim^ka_sim = {self.m_sim**self.ka_sim} exceeds the exhaustive "
                f"decoder guard {MAX_TUPLES}"
            )
        if len(self.delays) != self.ka_sim:
            raise ValueError("delay vector length must equal ka_sim")
        if self.delays.delays[-1] >= self.n_sim:
            raise ValueError("delays must be < n_sim")
        if not 0.0 < self.p < self.p_prime:
            raise ValueError("powers must satisfy 0 < p < p_prime")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class PupeEstimate:
    """Empirical per-user error rate with a binomial standard error and the
    marginal rates of the three error events (events can overlap)."""

    mean: float
    stderr: float
    trials: int
    collision_rate: float
    power_rate: float
    missed_rate: float

    def csv_row(self) -> str:
        return ",".join(
            [
                repr(self.mean),
                repr(self.stderr),
                str(self.trials),
                repr(self.collision_rate),
                repr(self.power_rate),
                repr(self.missed_rate),
            ]
        )


PUPE_CSV_HEADER = "mean,stderr,trials,collision_rate,power_rate,missed_rate"


def derive_trial_seed(seed: int, trial_index: int) -> int:
    """Counter-based per-trial seed (splitmix64 output stream).

    The finalizer is a bijection on 64-bit words and the counter strides by
    an odd constant, so all 2^64 trial indices under one seed map to
    distinct stream seeds, independent of any parallel partitioning.
    """
    x = (seed + (trial_index + 1) * _GOLDEN64) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def _shift_bank(codebook: np.ndarray, d: int, n: int) -> np.ndarray:
    """Codebook rows delayed by d channel uses and truncated to the window."""
    if d == 0:
        return codebook
    out = np.zeros_like(codebook)
    out[:, d:] = codebook[:, : n - d]
    return out


def _pairwise_metric(banks, b, qn, ka):
    """Squared-distance metric, up to the candidate-independent ||Y||^2, for
    every ordered candidate tuple; shape (m,)*ka."""
    singles = [qn[i] - 2.0 * b[i] for i in range(ka)]
    if ka == 1:
        return singles[0]
    if ka == 2:
        g01 = banks[0] @ banks[1].T
        return singles[0][:, None] + singles[1][None, :] + 2.0 * g01
    g01 = banks[0] @ banks[1].T
    g02 = banks[0] @ banks[2].T
    g12 = banks[1] @ banks[2].T
    return (
        singles[0][:, None, None]
        + singles[1][None, :, None]
        + singles[2][None, None, :]
        + 2.0 * (g01[:, :, None] + g02[:, None, :] + g12[None, :, :])
    )


def _mask_duplicates(metric: np.ndarray, ka: int) -> None:
    """Exclude tuples with repeated messages: the decoded list is distinct."""
    if ka == 1:
        return
    m = metric.shape[0]
    if ka == 2:
        np.fill_diagonal(metric, np.inf)
        return
    idx = np.arange(m)
    metric[idx, idx, :] = np.inf
    metric[idx, :, idx] = np.inf
    metric[:, idx, idx] = np.inf


def run_trial(config: SimConfig, trial_index: int) -> tuple[int, int, int, int]:
    """One ensemble draw; returns per-user counts (error, collision, power, missed)."""
    rng = np.random.default_rng(derive_trial_seed(config.seed, trial_index))
    n, m, ka = config.n_sim, config.m_sim, config.ka_sim
    codebook = rng.normal(0.0, math.sqrt(config.p), size=(m, n))
    messages = rng.integers(0, m, size=ka)
    noise = rng.normal(0.0, config.noise_std, size=n)

    banks = [_shift_bank(codebook, d, n) for d in config.delays.delays]
    y = noise.copy()
    for i in range(ka):
        y += banks[i][messages[i]]

    b = [banks[i] @ y for i in range(ka)]
    qn = [np.einsum("ij,ij->i", banks[i], banks[i]) for i in range(ka)]
    metric = _pairwise_metric(banks, b, qn, ka)
    _mask_duplicates(metric, ka)
    flat = int(np.argmin(metric))
    if ka > 1:
        decoded = {int(i) for i in np.unravel_index(flat, metric.shape)}
    else:
        decoded = {flat}

    norms = np.einsum("ij,ij->i", codebook, codebook)
    cap = config.n_sim * config.p_prime
    errors = collisions = powers = missed = 0
    counts = np.bincount(messages, minlength=m)
    for i in range(ka):
        msg = int(messages[i])
        collided = bool(counts[msg] > 1)
        violated = bool(norms[msg] > cap)
        absent = msg not in decoded
        collisions += collided
        powers += violated
        missed += absent
        errors += collided or violated or absent
    return int(errors), int(collisions), int(powers), int(missed)


def _chunk_counts(config: SimConfig, start: int, stop: int) -> tuple[int, int, int, int]:
    e = c = p = ms = 0
    for t in range(start, stop):
        de, dc, dp, dm = run_trial(config, t)
        e += de
        c += dc
        p += dp
        ms += dm
    return e, c, p, ms


def simulate_pupe(config: SimConfig, workers: int = 1) -> PupeEstimate:
    """Empirical PUPE over the configured number of trials."""
    chunks = [
        (config, s, min(s + CHUNK_TRIALS, config.trials))
        for s in range(0, config.trials, CHUNK_TRIALS)
    ]
    if workers <= 1:
        results = [_chunk_counts(*c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_counts_star, chunks))
    errors = sum(r[0] for r in results)
    collisions = sum(r[1] for r in results)
    powers = sum(r[2] for r in results)
    missed = sum(r[3] for r in results)

    denom = config.trials * config.ka_sim
    mean = errors / denom
    stderr = math.sqrt(mean * (1.0 - mean) / config.trials)
    return PupeEstimate(
        mean=mean,
        stderr=stderr,
        trials=config.trials,
        collision_rate=collisions / denom,
        power_rate=powers / denom,
        missed_rate=missed / denom,
    )


def _chunk_counts_star(args):
    return _chunk_counts(*args)


def information_density_decode(
    config: SimConfig, codebook: np.ndarray, y: np.ndarray
) -> tuple[int, ...]:
    """Explicit information-density decoder (reference path for the
    equivalence check; enumerates candidate tuples in Python)."""
    n, m, ka = config.n_sim, config.m_sim, config.ka_sim
    banks = [_shift_bank(codebook, d, n) for d in config.delays.delays]
    active = np.zeros(n)
    for d in config.delays.delays:
        active[d:] += 1.0
    var_y = config.noise_std**2 + active * config.p
    log_py = -0.5 * (np.log(2.0 * math.pi * var_y) + y * y / var_y)

    best, best_val = None, -math.inf
    for tup in itertools.product(range(m), repeat=ka):
        if len(set(tup)) != ka:
            continue
        mu = np.zeros(n)
        for i in range(ka):
            mu += banks[i][tup[i]]
        log_cond = -0.5 * (
            np.log(2.0 * math.pi * config.noise_std**2)
            + (y - mu) ** 2 / config.noise_std**2
        )
        val = float(np.sum(log_cond - log_py))
        if val > best_val:
            best, best_val = tup, val
    return best
