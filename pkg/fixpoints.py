#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fixed points of iterated permutations pi**k.

A point is fixed by pi**k exactly when its cycle length divides k, so the
statistics of pi**k are driven by the divisors of k: tau(k) expected fixed
points, exp(-sigma(k)/k) chance of none, and the full count law given by the
coefficients of exp(sum_{d | k} (y**d - 1) / d).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Tuple

import mpmath

from errors import ConsistencyError, DomainError
from exactnum import (
    DivisorProfile, HighPrecisionReal, as_rational, divisor_profile, exp_rational,
    from_rational, next_prime,
)
from series import (
    BivariateSeries, TruncatedSeries, bv_diagonal, bv_exp, bv_from_z, bv_mul,
    bv_partial_y, series_from_terms, ts_exp, ts_one_minus_z_times,
)

logger = logging.getLogger(__name__)

SERIES_CHECK_MAX_K = 24
DEFAULT_GRID = 60
MATCH_TOLERANCE = 1e-6


def fixed_point_divisor_rule(cycle_length: int, k: int) -> bool:
    """True iff every point of a cycle of this length is fixed by pi**k."""
    if cycle_length < 1 or k < 1:
        raise DomainError("cycle length and k must be positive")
    return k % cycle_length == 0


def finite_expected_fixed_points(k: int, n: int) -> int:
    """Exact mean number of fixed points of pi**k over S_n: #{d | k : d <= n}."""
    if n < 1:
        raise DomainError("n must be positive")
    return len(divisor_profile(k).divisors_up_to(n))


def fixed_point_ogf(k: int, order: int) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """Run the double-EGF construction for pi**k.

    Builds a(y, z) = exp(sum_{d | k} (y**d - z**d) / d) / (1 - z), differentiates
    in y and sets y = z. Returns that diagonal (coefficient of z**(n-1) is the
    mean fixed-point count on S_n) and the diagonal times (1 - z).
    """
    profile = divisor_profile(k)
    exponent = BivariateSeries.from_terms(
        {key: value
         for d in profile.divisors_up_to(order)
         for key, value in (((d, 0), Fraction(1, d)), ((0, d), Fraction(-1, d)))},
        order,
    )
    pole = bv_from_z(TruncatedSeries((Fraction(1),) * (order + 1)))
    a = bv_mul(pole, bv_exp(exponent))
    diagonal = bv_diagonal(bv_partial_y(a))
    return diagonal, ts_one_minus_z_times(diagonal)


def expected_fixed_points(k: int, series_check_max_k: int = SERIES_CHECK_MAX_K) -> int:
    """tau(k), cross-checked against the double-EGF construction for small k.

    The series has order k + 1, so the check only runs for k up to
    ``series_check_max_k``; larger k return the divisor count unchecked.
    """
    profile = divisor_profile(k)
    if profile.k > series_check_max_k:
        logger.debug(f"series check skipped for k={profile.k} (limit {series_check_max_k})")
    else:
        _, reduced = fixed_point_ogf(profile.k, profile.k + 1)
        for i, c in enumerate(reduced.coefficients):
            expected = 1 if (i + 1) in profile.divisors else 0
            if c != expected:
                raise ConsistencyError(
                    f"series check failed for k={profile.k}: coefficient {i} is {c}, expected {expected}")
        total = sum(reduced.coefficients, Fraction(0))
        if total != profile.tau:
            raise ConsistencyError(f"series check failed for k={profile.k}: {total} != tau {profile.tau}")
        logger.debug(f"series check passed for k={profile.k}")
    return profile.tau


@dataclass(frozen=True)
class FixpointDistribution:
    """P(pi**k has exactly c fixed points), c = 0..c_max, in the n -> infinity limit."""
    k: int
    probabilities: Tuple[HighPrecisionReal, ...]
    c_max: int
    tail_bound: HighPrecisionReal
    exact_coefficients: Tuple[Fraction, ...] = ()

    def total(self) -> HighPrecisionReal:
        return _hp_sum(self.probabilities)

    def mean(self) -> HighPrecisionReal:
        bits = self.probabilities[0].precision_bits
        with mpmath.workprec(bits):
            value = mpmath.fsum(c * p.value for c, p in enumerate(self.probabilities))
        return HighPrecisionReal(value, bits)

    def pgf(self, x: HighPrecisionReal) -> HighPrecisionReal:
        """sum of p_c x**c over the computed coefficients."""
        bits = self.probabilities[0].precision_bits
        with mpmath.workprec(bits):
            value = mpmath.fsum(p.value * x.value ** c for c, p in enumerate(self.probabilities))
        return HighPrecisionReal(value, bits)

    def to_rows(self) -> List[Tuple[int, HighPrecisionReal]]:
        return list(enumerate(self.probabilities))


def _hp_sum(values) -> HighPrecisionReal:
    values = list(values)
    bits = min(v.precision_bits for v in values)
    with mpmath.workprec(bits):
        return HighPrecisionReal(mpmath.fsum(v.value for v in values), bits)


def prob_power_derangement(k: int, precision_bits: int) -> HighPrecisionReal:
    """exp(-sigma(k)/k): pi**k has no fixed point."""
    return exp_rational(-divisor_profile(k).sigma_over_k, precision_bits)


def fixpoint_distribution(k: int, c_max: int, precision_bits: int) -> FixpointDistribution:
    """Fixed-point count law of pi**k up to c_max.

    Divisors above c_max cannot touch coefficients up to c_max, so the exact
    exp series only needs the divisors d <= c_max; the single transcendental
    factor exp(-sigma(k)/k) is applied to each rational coefficient last.
    """
    if c_max < 0:
        raise DomainError("c_max must be non-negative")
    profile = divisor_profile(k)
    exponent = series_from_terms([(d, Fraction(1, d)) for d in profile.divisors_up_to(c_max)], c_max)
    logger.info(f"fixpoint distribution: k={profile.k}, c_max={c_max}, "
                f"{len(profile.divisors_up_to(c_max))} divisors in range")
    coefficients = ts_exp(exponent).coefficients
    factor = exp_rational(-profile.sigma_over_k, precision_bits)
    probabilities = tuple(from_rational(c, precision_bits) * factor for c in coefficients)
    total = _hp_sum(probabilities)
    with mpmath.workprec(precision_bits):
        tail = HighPrecisionReal(max(mpmath.mpf(0), 1 - total.value), precision_bits)
    return FixpointDistribution(profile.k, probabilities, c_max, tail, coefficients)


def pgf_eval(k: int, x, precision_bits: int) -> HighPrecisionReal:
    """exp(sum_{d | k} (x**d - 1) / d), the generating function of the count law at x."""
    if not isinstance(x, HighPrecisionReal):
        x = from_rational(as_rational(x), precision_bits)
    if x.value < 0 or x.value > 1:
        raise DomainError("x must lie in [0, 1]")
    profile = divisor_profile(k)
    wp = precision_bits + 16
    with mpmath.workprec(wp):
        exponent = mpmath.fsum((x.value ** d - 1) / d for d in profile.divisors)
        value = mpmath.exp(exponent)
    with mpmath.workprec(precision_bits):
        return HighPrecisionReal(+value, precision_bits)


def _grid_tail_bound(grid: int) -> Fraction:
    """Bound on sum over c1 + c2 > grid of 64 s**2 2**s / s!, s = c1 + c2.

    Any weight below (c1 + 8 c2)**2 <= 64 s**2, times the joint mass
    (7/8)**c2 / (c1! c2!) <= 1 / (c1! c2!), sums to at most this.
    """
    s = grid + 1
    first = Fraction(64 * s * s * 2 ** s, math.factorial(s))
    ratio = Fraction(2 * (s + 1), s * s)
    return first / (1 - ratio)


def grid_expectation(weight: Callable[[int, int], Fraction], threshold: int,
                     precision_bits: int, grid: int = DEFAULT_GRID) -> Tuple[HighPrecisionReal, Fraction]:
    """E[weight(c1, c2) ; c1 >= threshold] under the independent Poisson(1) x Poisson(7/8) law.

    Summed exactly over c1, c2 <= grid, then multiplied by exp(-15/8). The
    returned rational bounds the omitted mass for weights below (c1 + 8 c2)**2.
    """
    if grid < 8:
        raise DomainError("grid must be at least 8")
    total = Fraction(0)
    c1_weights = [Fraction(1, math.factorial(c)) for c in range(grid + 1)]
    c2_weights = [Fraction(7, 8) ** c / math.factorial(c) for c in range(grid + 1)]
    for c1 in range(max(threshold, 0), grid + 1):
        for c2 in range(grid + 1):
            w = weight(c1, c2)
            if w:
                total += w * c1_weights[c1] * c2_weights[c2]
    tail = _grid_tail_bound(grid)
    logger.debug(f"grid expectation: grid {grid}, tail bound {float(tail):.3e}")
    return exp_rational(Fraction(-15, 8), precision_bits) * total, tail


def _pairs(c1: int, c2: int) -> Fraction:
    m = c1 + 8 * c2
    return Fraction(m * (m - 1), 2)


def _workload(c1: int, c2: int) -> Fraction:
    return Fraction(c1 + 8 * c2)


@dataclass(frozen=True)
class PairExpectation:
    value: HighPrecisionReal
    tail_bound: Fraction


def restricted_pair_expectation(threshold: int, precision_bits: int) -> PairExpectation:
    """E[m(m-1)/2 ; c1 >= threshold] with m = c1 + 8 c2 (restricted, not normalised).

    threshold 2 gives 113/2 - 105/e, threshold 1 gives 113/2 - 49/e and
    threshold 0 gives 113/2. ``tail_bound`` bounds what the finite grid omits.
    """
    value, tail = grid_expectation(_pairs, threshold, precision_bits)
    return PairExpectation(value, tail)


@dataclass(frozen=True)
class WorkloadCandidate:
    label: str
    value: HighPrecisionReal
    matches_target: bool


@dataclass(frozen=True)
class WorkloadReport:
    target_label: str
    target: HighPrecisionReal
    candidates: Tuple[WorkloadCandidate, ...]

    @property
    def matched(self) -> List[str]:
        return [c.label for c in self.candidates if c.matches_target]


def restricted_workload_expectation(precision_bits: int) -> WorkloadReport:
    """Compare readings of "expected c1 + 8 c2 given c1 > 0" with 113/2 - 46/e."""
    inv_e = exp_rational(-1, precision_bits)
    target = inv_e * -46 + Fraction(113, 2)
    p_c1_positive = 1 - inv_e
    restricted_work, _ = grid_expectation(_workload, 1, precision_bits)
    restricted_pairs, _ = grid_expectation(_pairs, 1, precision_bits)
    restricted_pairs_2, _ = grid_expectation(_pairs, 2, precision_bits)
    restricted_half_square, _ = grid_expectation(
        lambda c1, c2: Fraction((c1 + 8 * c2) ** 2, 2), 1, precision_bits)
    readings = [
        ("E[c1+8c2 ; c1>=1]", restricted_work),
        ("E[c1+8c2 | c1>=1]", restricted_work / p_c1_positive),
        ("E[m(m-1)/2 ; c1>=1]", restricted_pairs),
        ("E[m(m-1)/2 | c1>=1]", restricted_pairs / p_c1_positive),
        ("E[m(m-1)/2 ; c1>=2]", restricted_pairs_2),
        ("E[m^2/2 ; c1>=1]", restricted_half_square),
    ]
    candidates = tuple(
        WorkloadCandidate(label, value, abs(float(value) - float(target)) < MATCH_TOLERANCE)
        for label, value in readings
    )
    return WorkloadReport("113/2 - 46/e", target, candidates)


@dataclass(frozen=True)
class IterationAdvice:
    k: int
    tau: int
    prime: int
    prime_tau: int
    prime_is_k: bool

    @property
    def expected_fixed_points(self) -> int:
        return self.tau

    @property
    def expected_fixed_points_at_prime(self) -> int:
        return self.prime_tau


def iteration_advice(k: int) -> IterationAdvice:
    """tau(k) next to the nearest prime >= k, whose power has only 2 expected fixed points."""
    profile: DivisorProfile = divisor_profile(k)
    prime = next_prime(profile.k)
    prime_tau = divisor_profile(prime).tau
    return IterationAdvice(profile.k, profile.tau, prime, prime_tau, prime == profile.k)
