#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for the permutation laboratory
"""

import math
import sys

import numpy as np
import pytest
from scipy.stats import chisquare

from errors import DomainError
from permlab import (
    Permutation, compose, count_fixed_points, cycle_decomposition, cycle_type_census,
    enumerate_sn, experiment_iterated_fixpoints, identity, inverse, miss_probability,
    point_cycle_lengths, permutation_power, random_permutation, trial_rng,
)


def test_permutation_basics():
    """Construction, composition, inverse and cycle decomposition."""
    print("Testing permutation basics...")

    p = Permutation.from_cycles([(0, 1, 2), (3, 4)], 6)
    assert p.to_list() == [1, 2, 0, 4, 3, 5]
    assert p(0) == 1 and p(5) == 5
    assert compose(p, inverse(p)) == identity(6)
    assert p * identity(6) == p

    d = cycle_decomposition(p)
    assert d.cycles == ((0, 1, 2), (3, 4), (5,))
    assert d.cycle_count == 3
    assert d.cycle_type == (1, 2, 3)
    assert d.length_histogram == {1: 1, 2: 1, 3: 1}
    assert d.to_permutation() == p
    assert count_fixed_points(p) == 1

    q = Permutation([5, 4, 3, 2, 1, 0])
    assert compose(p, q).to_list() == [p(q(x)) for x in range(6)]

    for bad in ([0, 0, 1], [1, 2, 3], []):
        with pytest.raises(DomainError):
            Permutation(bad)
    with pytest.raises(DomainError):
        compose(p, identity(5))

    print("✅ Permutation basics test passed")


def test_powers():
    """Powers by cycle rotation agree with repeated composition."""
    print("Testing permutation powers...")

    p = random_permutation(40, seed=7)
    running = identity(40)
    for k in range(0, 13):
        assert permutation_power(p, k) == running, f"k={k}"
        running = compose(p, running)
    assert p ** 6 == permutation_power(p, 6)

    r = Permutation.from_cycles([(0, 1, 2, 3, 4, 5)], 6)
    assert cycle_decomposition(r ** 2).cycle_type == (3, 3)
    assert cycle_decomposition(r ** 3).cycle_type == (2, 2, 2)
    assert r ** 6 == identity(6)
    with pytest.raises(DomainError):
        permutation_power(r, -1)

    print("✅ Permutation power test passed")


def test_enumeration_and_census():
    """S_n is enumerated exactly once; the census counts cycle types."""
    print("Testing enumeration...")

    perms = list(enumerate_sn(5))
    assert len(perms) == 120
    assert len(set(perms)) == 120
    census = cycle_type_census(4)
    assert sum(census.values()) == 24
    assert census[(1, 1, 1, 1)] == 1
    assert census[(4,)] == 6
    assert census[(2, 2)] == 3
    assert census[(1, 3)] == 8
    assert census[(1, 1, 2)] == 6
    derangements = sum(m for t, m in cycle_type_census(6).items() if 1 not in t)
    assert derangements == 265
    with pytest.raises(DomainError):
        next(enumerate_sn(9))

    print("✅ Enumeration test passed")


def test_point_cycle_lengths():
    """Pointer doubling matches the decomposition, one mapping or a batch."""
    print("Testing point cycle lengths...")

    p = Permutation.from_cycles([(0, 1, 2), (3, 4)], 6)
    assert point_cycle_lengths(p.mapping).tolist() == [3, 3, 3, 2, 2, 1]

    rng = trial_rng(3, 0)
    batch = np.stack([rng.permutation(50) for _ in range(8)])
    lengths = point_cycle_lengths(batch)
    assert lengths.shape == (8, 50)
    for row, mapping in zip(lengths, batch):
        d = cycle_decomposition(Permutation(mapping))
        want = np.empty(50, dtype=np.int64)
        for cycle in d.cycles:
            want[list(cycle)] = len(cycle)
        assert row.tolist() == want.tolist()

    print("✅ Point cycle length test passed")


def test_random_permutation_is_uniform():
    """Seeded shuffles cover S_3 uniformly and are reproducible."""
    print("Testing random permutation uniformity...")

    assert random_permutation(30, seed=11) == random_permutation(30, seed=11)
    assert trial_rng(5, 2).integers(1 << 30) == trial_rng(5, 2).integers(1 << 30)

    index = {p: i for i, p in enumerate(enumerate_sn(3))}
    counts = np.zeros(6)
    for seed in range(3000):
        counts[index[random_permutation(3, seed)]] += 1
    assert chisquare(counts).pvalue > 1e-4

    with pytest.raises(DomainError):
        random_permutation(0, seed=1)
    with pytest.raises(DomainError):
        random_permutation(5, seed=-1)

    print("✅ Random permutation uniformity test passed")


def test_miss_probability():
    """A sample misses c fixed points with probability (1 - c/n)**(n f)."""
    print("Testing miss probability...")

    assert miss_probability(0, 64, 1 / 64) == 1.0
    assert math.isclose(miss_probability(2, 1 << 32, 1 / 64), math.exp(-2 / 64), rel_tol=1e-6)
    with pytest.raises(DomainError):
        miss_probability(5, 4, 0.5)
    with pytest.raises(DomainError):
        miss_probability(1, 4, 0)

    print("✅ Miss probability test passed")


def test_iterated_fixpoint_experiment():
    """Monte Carlo means sit near tau(k) and the report is reproducible."""
    print("Testing iterated fixed-point experiment...")

    report = experiment_iterated_fixpoints(200, 1500, [1, 6, 7], 1 / 8, seed=42)
    assert [r.k for r in report.rows] == [1, 6, 7]
    for k, tau in [(1, 1), (6, 4), (7, 2)]:
        row = report.row(k)
        assert abs(row.mean_fixed_points - tau) < 6 * row.fixed_points_standard_error + 0.05, f"k={k}"
        assert 0 < row.mean_miss_probability <= 1
    assert report.row(6).mean_miss_probability < report.row(1).mean_miss_probability

    again = experiment_iterated_fixpoints(200, 1500, [1, 6, 7], 1 / 8, seed=42)
    assert again.to_records() == report.to_records()
    with pytest.raises(KeyError):
        report.row(5)
    with pytest.raises(DomainError):
        experiment_iterated_fixpoints(10, 0, [1], 0.5, seed=0)
    with pytest.raises(DomainError):
        experiment_iterated_fixpoints(10, 5, [], 0.5, seed=0)

    print("✅ Iterated fixed-point experiment test passed")


@pytest.mark.slow
def test_experiment_independent_of_workers():
    """Chunk boundaries are fixed, so a worker pool gives the same numbers."""
    serial = experiment_iterated_fixpoints(1000, 600, [12], 1 / 64, seed=9, workers=1)
    pooled = experiment_iterated_fixpoints(1000, 600, [12], 1 / 64, seed=9, workers=2)
    assert serial.to_records() == pooled.to_records()


def main():
    print("🧪 Running Permutation Laboratory Tests")
    print("=" * 50)

    tests = [
        test_permutation_basics,
        test_powers,
        test_enumeration_and_census,
        test_point_cycle_lengths,
        test_random_permutation_is_uniform,
        test_miss_probability,
        test_iterated_fixpoint_experiment,
    ]
    try:
        for test in tests:
            test()
        print("\n🎉 All tests passed!")
    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
