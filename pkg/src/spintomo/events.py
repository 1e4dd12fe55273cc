"""Stochastic tunneling-event counting by uniform draws from a partitioned integer set.

The population {1..L} is split into M detection subsets with sizes
floor(L * p_i) plus one no-detection remainder. Each repetition of the
experiment picks one element uniformly; the subset it lands in is the bin
where the electron was detected.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PartitionError

SHARD_SIZE = 2**16

# stable ids used as RNG keys; never reorder
DIRECTION_IDS = {"z+": 0, "z-": 1, "x+": 2, "y+": 3, "x-": 4, "y-": 5}
CAMPAIGN_DIRECTIONS = ("z+", "z-", "x+", "y+")


@dataclass(frozen=True)
class SamplerPlan:
    L: int = 10**7
    R: int = 10**5
    seed: int = 0

    def validate(self, M: int) -> None:
        if self.L < 1 or self.R < 1:
            raise ValueError("L and R must be positive integers")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.L < 10**4 * M:
            raise ValueError(f"L = {self.L} is too small for M = {M} bins (need L >= 1e4 * M)")


@dataclass(frozen=True)
class BinPartition:
    sizes: np.ndarray  # N_1..N_M
    L: int

    @property
    def M(self) -> int:
        return len(self.sizes)

    @property
    def remainder(self) -> int:
        return int(self.L - self.sizes.sum())

    @property
    def boundaries(self) -> np.ndarray:
        """Upper element of each subset: s_i = (b_{i-1}, b_i]."""
        return np.cumsum(self.sizes)

    @property
    def fraction(self) -> float:
        return float(self.sizes.sum()) / self.L


@dataclass(frozen=True)
class CountRecord:
    direction: str
    counts: np.ndarray
    n_none: int
    R: int

    def __post_init__(self):
        if int(self.counts.sum()) + self.n_none != self.R:
            raise PartitionError("counts do not add up to the number of repetitions")


def build_partition(trace, L: int) -> BinPartition:
    """Subset sizes N_i = floor(L * p_i); the truncated mass joins the remainder."""
    p = np.asarray(getattr(trace, "values", trace), dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("bin probabilities must lie in [0, 1]")
    sizes = np.floor(L * p).astype(np.int64)
    if sizes.sum() > L:
        raise PartitionError(f"subset sizes sum to {int(sizes.sum())} > L = {L}")
    return BinPartition(sizes, int(L))


def shard_generator(seed: int, direction: str, shard: int) -> np.random.Generator:
    """Counter-based stream keyed by (master seed, direction id, shard id)."""
    ss = np.random.SeedSequence([int(seed), DIRECTION_IDS[direction], int(shard)])
    return np.random.Generator(np.random.Philox(ss))


def _count_shard(boundaries, L, M, seed, direction, shard, n):
    rng = shard_generator(seed, direction, shard)
    x = rng.integers(1, L + 1, size=n, dtype=np.int64)
    idx = np.searchsorted(boundaries, x, side="left")
    return np.bincount(idx, minlength=M + 1)


def draw_events(partition: BinPartition, R: int, seed: int, direction: str = "z+", workers: int = 1) -> CountRecord:
    """Draw R uniform elements of {1..L} and tally the subsets they fall in.

    Shards of SHARD_SIZE draws have independent streams, so the totals are
    identical for any ``workers``.
    """
    if R < 1:
        raise ValueError("R must be positive")
    if direction not in DIRECTION_IDS:
        raise ValueError(f"unknown direction {direction!r}")
    bounds = partition.boundaries
    n_shards = -(-R // SHARD_SIZE)
    jobs = [(s, min(SHARD_SIZE, R - s * SHARD_SIZE)) for s in range(n_shards)]

    def run(job):
        return _count_shard(bounds, partition.L, partition.M, seed, direction, *job)

    if workers > 1 and n_shards > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    total = np.sum(parts, axis=0, dtype=np.int64)
    return CountRecord(direction, total[:-1], int(total[-1]), int(R))


def empirical_probabilities(rec: CountRecord) -> np.ndarray:
    if rec.R <= 0:
        raise ValueError("cannot estimate probabilities from R = 0 repetitions")
    return rec.counts / rec.R


def moving_average(x, window: int = 5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.convolve(x, np.ones(window) / window, mode="valid")


def local_maxima(x, include_ends: bool = False) -> np.ndarray:
    """Indices of strict local maxima; endpoints count when they exceed their one neighbour."""
    x = np.asarray(x)
    inner = np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] > x[2:])) + 1
    if not include_ends or len(x) < 2:
        return inner
    ends = [i for i, j in ((0, 1), (len(x) - 1, len(x) - 2)) if x[i] > x[j]]
    return np.sort(np.concatenate([inner, np.array(ends, dtype=int)]))
