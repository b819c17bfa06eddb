#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for fixed points of iterated permutations
"""

import logging
import math
import sys
from fractions import Fraction

import pytest

from errors import DomainError
from exactnum import const_e, divisor_profile, exp_rational, from_rational
from fixpoints import (
    expected_fixed_points, finite_expected_fixed_points, fixed_point_divisor_rule,
    fixpoint_distribution, grid_expectation, iteration_advice, pgf_eval,
    prob_power_derangement, restricted_pair_expectation, restricted_workload_expectation,
)
from permlab import count_fixed_points, enumerate_sn, permutation_power

BITS = 256


def test_expected_fixed_points_is_tau():
    """The double-EGF check agrees with tau(k) for every small k."""
    print("Testing expected fixed points...")

    for k in range(1, 25):
        assert expected_fixed_points(k) == divisor_profile(k).tau, f"k={k}"
    assert expected_fixed_points(1081080) == 256
    assert expected_fixed_points(7, series_check_max_k=0) == 2

    print("✅ Expected fixed points test passed")


def test_series_check_cutoff_is_logged(caplog):
    """Past the cutoff the divisor count is returned and the skip is logged."""
    with caplog.at_level(logging.DEBUG, logger='fixpoints'):
        assert expected_fixed_points(25) == 3
        assert expected_fixed_points(24) == 8
    messages = [record.getMessage() for record in caplog.records]
    assert any('series check skipped for k=25' in m for m in messages), messages
    assert any('series check passed for k=24' in m for m in messages), messages
    assert not any('skipped for k=24' in m for m in messages)


def test_finite_mean_matches_enumeration():
    """Average fixed points of pi**k over all of S_n equals #{d | k : d <= n}."""
    print("Testing finite-n means against enumeration...")

    for n, k in [(4, 6), (5, 6), (5, 12), (6, 4), (6, 7)]:
        perms = list(enumerate_sn(n))
        total = sum(count_fixed_points(permutation_power(p, k)) for p in perms)
        assert Fraction(total, len(perms)) == finite_expected_fixed_points(k, n), f"n={n}, k={k}"
    assert fixed_point_divisor_rule(3, 12)
    assert not fixed_point_divisor_rule(5, 12)

    print("✅ Finite-n mean test passed")


def test_fixpoint_distribution():
    """The count law for k = 1 is Poisson(1); for k = 6 its mean is tau(6)."""
    print("Testing fixed-point distributions...")

    poisson = fixpoint_distribution(1, 40, BITS)
    inv_e = 1 / const_e(BITS)
    for c in range(6):
        assert poisson.probabilities[c].agrees_with(inv_e / math.factorial(c), bits=200)
    assert poisson.exact_coefficients[3] == Fraction(1, 6)

    dist = fixpoint_distribution(6, 200, BITS)
    assert len(dist.to_rows()) == 201
    assert dist.probabilities[0].agrees_with(prob_power_derangement(6, BITS))
    assert dist.probabilities[0].agrees_with(exp_rational(-2, BITS))
    assert abs(float(dist.total()) - 1) < 1e-30
    assert float(dist.tail_bound) < 1e-30
    assert abs(float(dist.mean()) - 4) < 1e-25

    half = from_rational(Fraction(1, 2), BITS)
    assert dist.pgf(half).agrees_with(pgf_eval(6, half, BITS), bits=150)

    with pytest.raises(DomainError):
        fixpoint_distribution(6, -1, BITS)

    print("✅ Fixed-point distribution test passed")


def test_pgf_eval():
    """PGF endpoints: 1 at x = 1 and the derangement probability at x = 0."""
    print("Testing PGF evaluation...")

    assert pgf_eval(12, 1, BITS).agrees_with(1)
    assert pgf_eval(12, 0, BITS).agrees_with(prob_power_derangement(12, BITS))
    for bad in (2, -1, '3/2'):
        with pytest.raises(DomainError):
            pgf_eval(12, bad, BITS)

    print("✅ PGF evaluation test passed")


def test_restricted_pair_expectations():
    """Grid sums reproduce the closed forms for thresholds 0, 1 and 2."""
    print("Testing restricted pair expectations...")

    inv_e = 1 / const_e(BITS)
    assert restricted_pair_expectation(0, BITS).value.agrees_with(Fraction(113, 2), bits=150)
    assert restricted_pair_expectation(1, BITS).value.agrees_with(Fraction(113, 2) - inv_e * 49, bits=150)
    pairs = restricted_pair_expectation(2, BITS)
    assert pairs.value.agrees_with(Fraction(113, 2) - inv_e * 105, bits=150)
    assert 0 < pairs.tail_bound < Fraction(1, 10 ** 40), f"Grid tail bound too loose: {float(pairs.tail_bound)}"

    value, tail = grid_expectation(lambda c1, c2: Fraction(1), 0, BITS)
    assert value.agrees_with(1, bits=150)
    assert tail < Fraction(1, 10 ** 40)
    with pytest.raises(DomainError):
        grid_expectation(lambda c1, c2: Fraction(1), 0, BITS, grid=4)

    print("✅ Restricted pair expectation test passed")


def test_workload_report():
    """Every reading is reported next to the quoted target; none is forced to match."""
    print("Testing workload readings...")

    report = restricted_workload_expectation(BITS)
    inv_e = 1 / const_e(BITS)
    assert report.target_label == "113/2 - 46/e"
    assert report.target.agrees_with(Fraction(113, 2) - inv_e * 46)
    assert len(report.candidates) == 6
    first = report.candidates[0]
    assert first.value.agrees_with(8 - inv_e * 7, bits=150)
    assert set(report.matched) <= {c.label for c in report.candidates}

    print("✅ Workload reading test passed")


def test_iteration_advice():
    """A prime exponent leaves only two expected fixed points."""
    print("Testing iteration advice...")

    advice = iteration_advice(24)
    assert (advice.tau, advice.prime, advice.prime_tau, advice.prime_is_k) == (8, 29, 2, False)
    assert advice.expected_fixed_points == 8
    assert advice.expected_fixed_points_at_prime == 2
    assert iteration_advice(13).prime_is_k

    print("✅ Iteration advice test passed")


def main():
    print("🧪 Running Fixed Point Tests")
    print("=" * 50)

    tests = [
        test_expected_fixed_points_is_tau,
        test_finite_mean_matches_enumeration,
        test_fixpoint_distribution,
        test_pgf_eval,
        test_restricted_pair_expectations,
        test_workload_report,
        test_iteration_advice,
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
