#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for permutation classes with restricted cycle lengths and counts
"""

import itertools
import math
import sys
from fractions import Fraction

import pytest

from classes import (
    CycleCountSet, CycleLengthSet, StructuredEGF, alpha_series, class_egf_series, class_egf_structured,
    convergence_report, exactly_t_cycles_series, joint_c1_c2_egf, joint_prob_c1_c2,
    limit_probability, prob_derangement, prob_exactly_c_fixed_points, prob_no_cycles_in,
    prob_no_k_cycles, prob_no_powerlength_cycles, prob_no_powerlength_cycles_partial,
)
from errors import DomainError, UnsupportedError
from exactnum import const_e, exp_rational
from permlab import cycle_type_census
from series import ts_egf_counts

ORDER = 6
BITS = 256


def census_count(n, accept):
    """Elements of S_n whose cycle type satisfies accept (n = 0 is the empty permutation)."""
    if n == 0:
        return 1 if accept(()) else 0
    return sum(m for cycle_type, m in cycle_type_census(n).items() if accept(cycle_type))


def test_egf_matches_brute_force():
    """n! [z^n] of the class EGF counts S_n by brute force, for every small A and B."""
    print("Testing class EGFs against enumeration...")

    lengths_universe = range(1, 6)
    counts_universe = range(0, 5)
    checked = 0
    for r in range(len(lengths_universe) + 1):
        for a in itertools.combinations(lengths_universe, r):
            lengths = CycleLengthSet.finite(a)
            for rb in range(len(counts_universe) + 1):
                for b in itertools.combinations(counts_universe, rb):
                    counts = CycleCountSet.finite(b)
                    got = ts_egf_counts(class_egf_series(lengths, counts, ORDER))
                    want = [census_count(n, lambda ct: all(x in a for x in ct) and len(ct) in b)
                            for n in range(ORDER + 1)]
                    assert got == want, f"A={a}, B={b}: {got} != {want}"
                    checked += 1
    assert checked == 32 * 32

    print("✅ Class EGF enumeration test passed")


def test_infinite_length_sets():
    """Complement, divisor and perfect-power sets against enumeration."""
    print("Testing infinite cycle-length sets...")

    assert alpha_series(CycleLengthSet.all(), 4).coefficients == (0, 1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))
    assert alpha_series(CycleLengthSet.finite([2]), 4).coefficients == (0, 0, Fraction(1, 2), 0, 0)

    for lengths in (CycleLengthSet.all(), CycleLengthSet.all_except([1]),
                    CycleLengthSet.all_except([2, 3]), CycleLengthSet.perfect_powers(2)):
        got = ts_egf_counts(class_egf_series(lengths, CycleCountSet.all(), ORDER))
        want = [census_count(n, lambda ct: all(lengths.contains(x) for x in ct)) for n in range(ORDER + 1)]
        assert got == want, f"{lengths.kind}: {got} != {want}"

    assert ts_egf_counts(class_egf_series(CycleLengthSet.perfect_powers(2), CycleCountSet.all(), 4)) == [1, 1, 1, 1, 7]
    assert CycleLengthSet.perfect_powers(3).members_up_to(30) == [1, 8, 27]
    assert not CycleLengthSet.perfect_powers(2).contains(8)
    assert CycleLengthSet.divisors_of(12).members_up_to(6) == [1, 2, 3, 4, 6]

    # exactly two cycles: unsigned Stirling numbers of the first kind
    two = ts_egf_counts(exactly_t_cycles_series(CycleLengthSet.all(), 2, 5))
    assert two == [0, 0, 1, 3, 11, 50]
    exact = class_egf_series(CycleLengthSet.all(), CycleCountSet.exactly(2), 5)
    assert ts_egf_counts(exact) == two

    print("✅ Infinite cycle-length set test passed")


def test_structured_expansion():
    """The factored form expands to the same coefficients as exp(alpha)."""
    print("Testing factored EGFs...")

    for prohibited in ([1], [1, 2], [2, 5], [1, 2, 4, 8]):
        lengths = CycleLengthSet.all_except(prohibited)
        structured = class_egf_structured(lengths).expand(10)
        assert structured == class_egf_series(lengths, CycleCountSet.all(), 10)

    with_fixed = class_egf_structured(CycleLengthSet.all_except([1]), extra_factor=2).expand(ORDER)
    want = [census_count(n, lambda ct: ct.count(1) == 2) for n in range(ORDER + 1)]
    assert ts_egf_counts(with_fixed) == want

    with pytest.raises(UnsupportedError):
        class_egf_structured(CycleLengthSet.finite([1, 2]))
    with pytest.raises(DomainError):
        StructuredEGF(1, (Fraction(1),))
    assert 'exp(' in class_egf_structured(CycleLengthSet.all_except([1])).describe()

    print("✅ Factored EGF test passed")


def test_joint_fixed_points_and_short_cycles():
    """Exactly c1 fixed points and c2 cycles of length 2, 4 or 8."""
    print("Testing joint c1/c2 classes...")

    for c1, c2 in [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2)]:
        f = joint_c1_c2_egf(c1, c2)
        got = ts_egf_counts(f.expand(ORDER))
        want = [census_count(n, lambda ct: ct.count(1) == c1
                             and sum(1 for x in ct if x in (2, 4, 8)) == c2)
                for n in range(ORDER + 1)]
        assert got == want, f"c1={c1}, c2={c2}"
        assert limit_probability(f, BITS).agrees_with(joint_prob_c1_c2(c1, c2, BITS))

    expected = exp_rational(Fraction(-15, 8), BITS) * Fraction(49, 128)
    assert joint_prob_c1_c2(1, 2, BITS).agrees_with(expected)

    print("✅ Joint c1/c2 test passed")


def test_limit_probabilities():
    """Closed forms for the classic limits."""
    print("Testing limiting probabilities...")

    inv_e = 1 / const_e(BITS)
    assert prob_derangement(BITS).agrees_with(inv_e)
    assert prob_exactly_c_fixed_points(0, BITS).agrees_with(inv_e)
    assert prob_exactly_c_fixed_points(3, BITS).agrees_with(inv_e / 6)
    assert prob_no_k_cycles(2, BITS).agrees_with(exp_rational(Fraction(-1, 2), BITS))
    assert prob_no_cycles_in([1, 2, 4, 8], BITS).agrees_with(exp_rational(Fraction(-15, 8), BITS))

    squares = prob_no_powerlength_cycles(2, BITS)
    assert squares.to_fixed(8) == '0.19302529'
    cubes = prob_no_powerlength_cycles(3, BITS)
    assert cubes.to_fixed(8) == '0.30057532'
    assert abs(prob_no_powerlength_cycles_partial(2, 100000) - float(squares)) < 1e-5
    with pytest.raises(UnsupportedError):
        prob_no_powerlength_cycles(4, BITS)

    with pytest.raises(DomainError):
        limit_probability(StructuredEGF(2, ()), BITS)
    with pytest.raises(DomainError):
        limit_probability(StructuredEGF(0, ()), BITS)

    print("✅ Limiting probability test passed")


def test_convergence_report():
    """Derangement proportions converge to 1/e faster than 1/(n+1)!."""
    print("Testing convergence report...")

    rows = convergence_report(class_egf_structured(CycleLengthSet.all_except([1])), 20)
    assert len(rows) == 21
    assert rows[4].coefficient == Fraction(9, 24)
    for row in rows[1:]:
        assert float(row.distance) <= 1 / math.factorial(row.n + 1) * 1.0001

    with pytest.raises(DomainError):
        convergence_report(class_egf_structured(CycleLengthSet.all_except([1])), 6000)

    print("✅ Convergence report test passed")


def main():
    print("🧪 Running Permutation Class Tests")
    print("=" * 50)

    tests = [
        test_egf_matches_brute_force,
        test_infinite_length_sets,
        test_structured_expansion,
        test_joint_fixed_points_and_short_cycles,
        test_limit_probabilities,
        test_convergence_report,
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
