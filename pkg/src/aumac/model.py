"""Channel/code parameters, delay vectors, and overlap profiles.

All quantities here are immutable after construction and safe to share
across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class SystemParams:
    """Scalar parameters of one operating point.

    ``log_m`` is the payload size in nats; the alphabet size M = exp(log_m)
    is astronomically large at the headline scale (log_m = 100) and is never
    materialized as an integer.  ``p`` is the codebook symbol variance and
    ``p_prime`` the hard per-codeword power cap, both in linear power units.
    """

    n: int
    log_m: float
    ka: int
    epsilon: float
    alpha: float
    p: float
    p_prime: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"blocklength n must be >= 1, got {self.n}")
        if not self.log_m > 0:
            raise ValueError(f"payload log_m must be > 0, got {self.log_m}")
        if self.ka < 1:
            raise ValueError(f"user count ka must be >= 1, got {self.ka}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"target epsilon must lie in (0,1), got {self.epsilon}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"delay fraction alpha must lie in [0,1), got {self.alpha}")
        if not 0.0 < self.p < self.p_prime:
            raise ValueError(
                f"powers must satisfy 0 < p < p_prime, got p={self.p}, p_prime={self.p_prime}"
            )

    @property
    def d_max(self) -> int:
        """Largest admissible delay, floor(alpha*n).  Always < n."""
        return int(math.floor(self.alpha * self.n))


@dataclass(frozen=True)
class DelayVector:
    """Sorted per-user delays, normalized so the first arrival is at 0."""

    delays: tuple[int, ...]

    def __post_init__(self):
        d = self.delays
        if len(d) == 0:
            raise ValueError("delay vector must have at least one entry")
        if d[0] != 0:
            raise ValueError(f"first delay must be 0 (first arrival normalized), got {d[0]}")
        for a, b in zip(d, d[1:]):
            if b < a:
                raise ValueError(f"delays must be non-decreasing, got {a} before {b}")
        if d[0] < 0:
            raise ValueError("delays must be non-negative")

    def __len__(self) -> int:
        return len(self.delays)

    def validate_against(self, params: SystemParams) -> None:
        """Check the vector fits the operating point (user count, delay budget)."""
        if len(self.delays) != params.ka:
            raise ValueError(
                f"delay vector has {len(self.delays)} entries for ka={params.ka} users"
            )
        if self.delays[-1] > params.d_max:
            raise ValueError(
                f"max delay {self.delays[-1]} exceeds budget d_max={params.d_max}"
            )
        if self.delays[-1] >= params.n:
            raise ValueError("delays must be < n so every codeword contributes symbols")

    def restrict(self, subset: Iterable[int]) -> tuple[int, ...]:
        """Delays of the 1-based user indices in ``subset``, in sorted order."""
        return tuple(self.delays[i - 1] for i in sorted(subset))

    @staticmethod
    def zeros(ka: int) -> "DelayVector":
        return DelayVector((0,) * ka)


@dataclass(frozen=True)
class OverlapProfile:
    """Run-length encoded count of simultaneously received symbols per channel use.

    Profiles built from a delay vector are non-decreasing and end at the
    number of contributing codewords; worst-case profiles have at most two
    runs.  Downstream sums iterate over runs, so cost is independent of n.
    """

    runs: tuple[tuple[int, int], ...]  # (length, value) pairs
    total_len: int

    def __post_init__(self):
        if self.total_len < 1:
            raise ValueError("profile length must be >= 1")
        tot = 0
        for length, value in self.runs:
            if length < 1:
                raise ValueError(f"run length must be >= 1, got {length}")
            if value < 0:
                raise ValueError(f"run value must be >= 0, got {value}")
            tot += length
        if tot != self.total_len:
            raise ValueError(f"runs sum to {tot}, expected total_len={self.total_len}")
        for (_, a), (_, b) in zip(self.runs, self.runs[1:]):
            if a == b:
                raise ValueError("adjacent runs must have distinct values (canonical RLE)")

    @staticmethod
    def from_values(values: Sequence[int]) -> "OverlapProfile":
        """Canonical RLE of an explicit per-channel-use vector."""
        if len(values) == 0:
            raise ValueError("empty profile")
        runs: list[tuple[int, int]] = []
        cur = values[0]
        count = 1
        for v in values[1:]:
            if v == cur:
                count += 1
            else:
                runs.append((count, cur))
                cur = v
                count = 1
        runs.append((count, cur))
        return OverlapProfile(tuple((l, int(v)) for l, v in runs), len(values))

    def values(self) -> list[int]:
        """Expanded per-channel-use vector.  Only for tests and small n."""
        out: list[int] = []
        for length, value in self.runs:
            out.extend([value] * length)
        return out

    @property
    def max_value(self) -> int:
        return max(v for _, v in self.runs)

    def is_nondecreasing(self) -> bool:
        vals = [v for _, v in self.runs]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def is_zero(self) -> bool:
        return all(v == 0 for _, v in self.runs)

    def concat(self, other: "OverlapProfile") -> "OverlapProfile":
        runs = list(self.runs)
        for length, value in other.runs:
            if runs and runs[-1][1] == value:
                runs[-1] = (runs[-1][0] + length, value)
            else:
                runs.append((length, value))
        return OverlapProfile(tuple(runs), self.total_len + other.total_len)

    def serialize(self) -> str:
        """Text form ``len:value,len:value,...`` for CLI debugging output."""
        return ",".join(f"{l}:{v}" for l, v in self.runs)

    @staticmethod
    def parse(text: str) -> "OverlapProfile":
        runs = []
        for part in text.split(","):
            l, v = part.split(":")
            runs.append((int(l), int(v)))
        return OverlapProfile(tuple(runs), sum(l for l, _ in runs))


def overlap_profile(delays: Sequence[int], n: int) -> OverlapProfile:
    """Overlap counts of the codewords with the given (sorted) delays.

    Entry i (1-based) counts the delays <= i-1, i.e. how many of the
    contributing codewords have started by channel use i.  A delay >= n would
    mean a codeword contributing zero symbols inside the decoding window,
    which the model excludes.
    """
    if any(d < 0 for d in delays):
        raise ValueError("delays must be non-negative")
    if any(b < a for a, b in zip(delays, delays[1:])):
        raise ValueError("delays must be sorted non-decreasing")
    if any(d >= n for d in delays):
        raise ValueError(f"every delay must be < n={n}")
    if len(delays) == 0:
        return OverlapProfile(((n, 0),), n)
    runs: list[tuple[int, int]] = []
    prev_boundary = 0  # delays processed so far start at channel use prev_boundary+1
    count = 0
    i = 0
    k = len(delays)
    while i < k:
        d = delays[i]
        if d > prev_boundary:
            runs.append((d - prev_boundary, count))
            prev_boundary = d
        while i < k and delays[i] == d:
            i += 1
            count += 1
    if n > prev_boundary:
        runs.append((n - prev_boundary, count))
    return OverlapProfile(tuple(runs), n)


def worst_case_profile(k: int, iota: int, n: int, d_max: int) -> OverlapProfile:
    """Profile with d_max leading entries at ``iota`` and the rest at ``k``.

    This is the entrywise-minimal profile over all delay vectors within the
    budget for an error set of size k with first-arrival membership ``iota``.
    """
    if k < 1:
        raise ValueError("error set cardinality k must be >= 1")
    if iota not in (0, 1):
        raise ValueError(f"iota must be 0 or 1, got {iota}")
    if iota > k:
        raise ValueError("iota=1 requires k >= 1")
    if not 0 <= d_max < n:
        raise ValueError(f"d_max must lie in [0, n), got {d_max} for n={n}")
    if d_max == 0 or iota == k:
        return OverlapProfile(((n, k),), n)
    return OverlapProfile(((d_max, iota), (n - d_max, k)), n)
