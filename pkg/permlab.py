#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Permutation laboratory: sampling, cycle decomposition, powers, exhaustive S_n
enumeration and the iterated fixed-point Monte Carlo experiment.
"""

import itertools
import logging
import math
import multiprocessing
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

MAX_POINTS = 1 << 24
MAX_ENUMERATION = 8
CHUNK_TRIALS = 128
CHUNK_CELLS = 1 << 21


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection of 0..n-1 in one-line notation (read-only numpy array)."""
    mapping: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mapping, dtype=np.int64, copy=True).reshape(-1)
        n = arr.shape[0]
        if n < 1:
            raise DomainError("a permutation needs at least one point")
        if n > MAX_POINTS:
            raise DomainError(f"permutations are limited to {MAX_POINTS} points")
        if arr.min() < 0 or arr.max() >= n or np.any(np.bincount(arr, minlength=n) != 1):
            raise DomainError("mapping is not a bijection of 0..n-1")
        arr.setflags(write=False)
        object.__setattr__(self, 'mapping', arr)

    @property
    def n(self) -> int:
        return int(self.mapping.shape[0])

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> 'Permutation':
        mapping = np.arange(n, dtype=np.int64)
        for cycle in cycles:
            for i, x in enumerate(cycle):
                mapping[x] = cycle[(i + 1) % len(cycle)]
        return cls(mapping)

    def __call__(self, x: int) -> int:
        return int(self.mapping[x])

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(self.mapping.tobytes())

    def __mul__(self, other: 'Permutation') -> 'Permutation':
        return compose(self, other)

    def __pow__(self, k: int) -> 'Permutation':
        return permutation_power(self, k)

    def to_list(self) -> List[int]:
        return self.mapping.tolist()

    def __repr__(self):
        if self.n <= 16:
            return f"Permutation({self.to_list()})"
        return f"Permutation(n={self.n})"


@dataclass(frozen=True)
class CycleDecomposition:
    """Canonical disjoint cycles: each starts at its least element, ordered by it."""
    n: int
    cycles: Tuple[Tuple[int, ...], ...]

    @property
    def cycle_count(self) -> int:
        return len(self.cycles)

    @property
    def length_histogram(self) -> Dict[int, int]:
        return dict(sorted(Counter(len(c) for c in self.cycles).items()))

    @property
    def cycle_type(self) -> Tuple[int, ...]:
        return tuple(sorted(len(c) for c in self.cycles))

    def to_permutation(self) -> Permutation:
        return Permutation.from_cycles(self.cycles, self.n)


def identity(n: int) -> Permutation:
    return Permutation(np.arange(n, dtype=np.int64))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """p after q: x -> p(q(x))."""
    if p.n != q.n:
        raise DomainError("cannot compose permutations of different sizes")
    return Permutation(p.mapping[q.mapping])


def inverse(p: Permutation) -> Permutation:
    out = np.empty(p.n, dtype=np.int64)
    out[p.mapping] = np.arange(p.n, dtype=np.int64)
    return Permutation(out)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """PCG64 stream for one trial, derived from (seed, trial) only."""
    if seed < 0 or trial < 0:
        raise DomainError("seed and trial index must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def random_permutation(n: int, seed: int) -> Permutation:
    """Uniform permutation of n points from numpy's PCG64 shuffle; same seed, same result."""
    if n < 1:
        raise DomainError("n must be positive (S_0 is only handled analytically)")
    if n > MAX_POINTS:
        raise DomainError(f"n is limited to {MAX_POINTS}")
    if seed < 0:
        raise DomainError("seed must be non-negative")
    return Permutation(np.random.default_rng(seed).permutation(n))


def cycle_decomposition(p: Permutation) -> CycleDecomposition:
    mapping = p.mapping.tolist()
    seen = [False] * p.n
    cycles = []
    for start in range(p.n):
        if seen[start]:
            continue
        cycle = []
        x = start
        while not seen[x]:
            seen[x] = True
            cycle.append(x)
            x = mapping[x]
        cycles.append(tuple(cycle))
    return CycleDecomposition(p.n, tuple(cycles))


def permutation_power(p: Permutation, k: int) -> Permutation:
    """p**k cycle by cycle: an l-cycle becomes gcd(l, k) cycles of length l / gcd(l, k)."""
    if k < 0:
        raise DomainError("k must be non-negative")
    out = np.arange(p.n, dtype=np.int64)
    for cycle in cycle_decomposition(p).cycles:
        length = len(cycle)
        if length == 1:
            continue
        c = np.asarray(cycle, dtype=np.int64)
        out[c] = np.roll(c, -(k % length))
    return Permutation(out)


def count_fixed_points(p: Permutation) -> int:
    return int(np.count_nonzero(p.mapping == np.arange(p.n)))


def enumerate_sn(n: int) -> Iterator[Permutation]:
    """Every element of S_n once, in lexicographic order (n <= 8)."""
    if n < 1:
        raise DomainError("n must be positive")
    if n > MAX_ENUMERATION:
        raise DomainError(f"refusing to enumerate S_{n}; the limit is n = {MAX_ENUMERATION}")
    for mapping in itertools.permutations(range(n)):
        yield Permutation(np.array(mapping, dtype=np.int64))


@lru_cache(maxsize=None)
def _census(n: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    tally = Counter(cycle_decomposition(p).cycle_type for p in enumerate_sn(n))
    return tuple(sorted(tally.items()))


def cycle_type_census(n: int) -> Counter:
    """Number of elements of S_n of each cycle type (sorted length tuple)."""
    return Counter(dict(_census(n)))


def point_cycle_lengths(mappings) -> np.ndarray:
    """Length of the cycle through every point, for one mapping or a stacked batch.

    Pointer doubling: after j rounds rep[x] is the least label among the next
    2**j images of x, which is the least label of its cycle once 2**j >= n.
    """
    arr = np.asarray(mappings)
    perms = np.atleast_2d(arr)
    rows, n = perms.shape
    jump = perms.astype(np.int32, copy=True)
    rep = np.broadcast_to(np.arange(n, dtype=np.int32), (rows, n)).copy()
    for _ in range((n - 1).bit_length()):
        rep = np.minimum(rep, np.take_along_axis(rep, jump, axis=1))
        jump = np.take_along_axis(jump, jump, axis=1)
    keys = rep.astype(np.int64) + (np.arange(rows, dtype=np.int64) * n)[:, None]
    lengths = np.bincount(keys.ravel(), minlength=rows * n)[keys]
    return lengths if arr.ndim > 1 else lengths[0]


def miss_probability(c: int, n: int, fraction: float) -> float:
    """(1 - c/n)**(n * fraction): a uniform sample of n*fraction points misses all c."""
    if not 0 <= c <= n:
        raise DomainError("need 0 <= c <= n")
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    return float((1.0 - c / n) ** (n * fraction))


@dataclass(frozen=True)
class ExperimentRow:
    k: int
    mean_miss_probability: float
    standard_error: float
    mean_fixed_points: float
    fixed_points_standard_error: float


@dataclass(frozen=True)
class ExperimentReport:
    n: int
    trials: int
    seed: int
    fraction: float
    rows: Tuple[ExperimentRow, ...]

    def row(self, k: int) -> ExperimentRow:
        for r in self.rows:
            if r.k == k:
                return r
        raise KeyError(k)

    def to_records(self) -> List[Dict[str, float]]:
        return [r.__dict__.copy() for r in self.rows]


def _chunk_size(n: int) -> int:
    return max(1, min(CHUNK_TRIALS, CHUNK_CELLS // n))


def _run_chunk(task) -> np.ndarray:
    n, start, stop, seed, ks, fraction = task
    mappings = np.stack([trial_rng(seed, t).permutation(n) for t in range(start, stop)])
    lengths = point_cycle_lengths(mappings)
    sums = np.zeros((len(ks), 4), dtype=np.float64)
    for i, k in enumerate(ks):
        fixed = np.count_nonzero(np.int64(k) % lengths == 0, axis=1)
        miss = np.power(1.0 - fixed / n, n * fraction)
        sums[i] = (miss.sum(), np.square(miss).sum(), fixed.sum(), np.square(fixed.astype(np.float64)).sum())
    return sums


def _mean_and_error(total: float, total_sq: float, trials: int) -> Tuple[float, float]:
    mean = total / trials
    if trials < 2:
        return mean, 0.0
    variance = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
    return mean, math.sqrt(variance / trials)


def experiment_iterated_fixpoints(n: int, trials: int, ks: Sequence[int], fraction: float,
                                  seed: int, workers: int = 1) -> ExperimentReport:
    """Average miss probability and fixed-point count of pi**k over random pi in S_n.

    Fixed points of pi**k come from the cycle lengths (points whose length
    divides k), so no power is materialised. Trials use (seed, trial) streams
    and fixed chunk boundaries, so the report does not depend on ``workers``.
    """
    if n < 1 or n > MAX_POINTS:
        raise DomainError(f"n must lie in 1..{MAX_POINTS}")
    if trials < 1:
        raise DomainError("trials must be positive")
    if not ks or any(k < 1 or k >= (1 << 63) for k in ks):
        raise DomainError("every k must be a positive 63-bit integer")
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    if seed < 0:
        raise DomainError("seed must be non-negative")
    ks = [int(k) for k in ks]
    size = _chunk_size(n)
    tasks = [(n, s, min(s + size, trials), seed, ks, fraction) for s in range(0, trials, size)]
    logger.info(f"experiment: n={n}, trials={trials}, {len(tasks)} chunks, workers={workers}")
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers) as pool:
            partials = pool.map(_run_chunk, tasks)
    else:
        partials = [_run_chunk(t) for t in tasks]
    totals = np.zeros((len(ks), 4), dtype=np.float64)
    for part in partials:
        totals += part
    rows = []
    for i, k in enumerate(ks):
        miss_mean, miss_err = _mean_and_error(totals[i, 0], totals[i, 1], trials)
        fix_mean, fix_err = _mean_and_error(totals[i, 2], totals[i, 3], trials)
        rows.append(ExperimentRow(k, float(miss_mean), float(miss_err), float(fix_mean), float(fix_err)))
    return ExperimentReport(n, trials, seed, float(fraction), tuple(rows))
