#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Success-probability and cost calculators for fixed-point attacks.

Covers the two-fixed-point attack success curve, the matching-property attack
success, the iteration-count distinguisher and the multi-run key-recovery cost
model for a highly iterated cipher.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from errors import DomainError
from exactnum import (
    DEFAULT_GUARD_BITS, HighPrecisionReal, RationalLike, as_rational, divisor_profile,
    exp_rational,
)
from fixpoints import pgf_eval

logger = logging.getLogger(__name__)

# Observed no-fixed-point rate of a random permutation and chance that the
# k = 1081080 cipher shows a fixed point, both with a 1/64 search fraction.
FP_RANDOM = Fraction('0.014959')
FIND_CHARLIE = Fraction('0.581665')
CHARLIE_K = 1081080

STAGE1_FACTOR = CHARLIE_K + 4
STAGE2_FACTOR = 6 * 2 * (CHARLIE_K + 2)
INNER_KEY_BITS = 256
OUTER_BLOCK_BITS = 128
SEARCH_FRACTION = Fraction(1, 64)
COST_PRECISION_BITS = 128
MAX_RUNS = 64

BARD_TABLE_ETAS = tuple(Fraction(i, 10) for i in range(1, 11))


def _eta(eta: RationalLike) -> Fraction:
    eta = as_rational(eta)
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return eta


def _bracket(c: int, eta: Fraction) -> Fraction:
    """P(at least two of c fixed points fall in the known fraction)."""
    miss = 1 - eta
    return 1 - miss ** c - c * eta * miss ** (c - 1)


def bard_success(eta: RationalLike, precision_bits: int) -> HighPrecisionReal:
    """sum over c >= 2 of P(c1 = c) * P(two of them are known), P(c1 = c) = 1/(c! e).

    Summed exactly up to the first M with 2/(M+1)! below the working precision;
    every bracket lies in [0, 1], so that bounds the omitted terms.
    """
    eta = _eta(eta)
    limit = Fraction(1, 1 << (precision_bits + DEFAULT_GUARD_BITS))
    total, c = Fraction(0), 2
    while True:
        total += _bracket(c, eta) / math.factorial(c)
        if Fraction(2, math.factorial(c + 1)) < limit:
            break
        c += 1
    logger.debug(f"bard_success: {c - 1} terms for eta={eta}")
    return exp_rational(-1, precision_bits) * total


def _bard_closed_form(eta: mpmath.mpf) -> mpmath.mpf:
    return 1 - (1 + eta) * mpmath.exp(-eta)


def bard_half_success_eta(precision_bits: int, conditional: bool = True) -> Optional[HighPrecisionReal]:
    """Smallest eta giving half of the success attainable with the full code-book.

    The conditional reading solves success(eta) = success(1) / 2. The
    unconditional reading, success(eta) = 1/2, has no solution because
    success(1) = 1 - 2/e < 1/2; it returns None.
    """
    wp = precision_bits + DEFAULT_GUARD_BITS
    with mpmath.workprec(wp):
        top = _bard_closed_form(mpmath.mpf(1))
        target = top / 2 if conditional else mpmath.mpf(1) / 2
        if target > top:
            return None
        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        for _ in range(wp):
            mid = (lo + hi) / 2
            if _bard_closed_form(mid) < target:
                lo = mid
            else:
                hi = mid
        value = (lo + hi) / 2
    with mpmath.workprec(precision_bits):
        return HighPrecisionReal(+value, precision_bits)


@dataclass(frozen=True)
class BardRow:
    eta: Fraction
    success: HighPrecisionReal

    @property
    def success_percent(self) -> float:
        return round(float(self.success) * 100, 2)

    def to_record(self) -> Dict[str, object]:
        return {'eta': float(self.eta), 'success': self.success.to_decimal(12),
                'success_percent': self.success_percent}


def bard_table(precision_bits: int) -> List[BardRow]:
    return [BardRow(eta, bard_success(eta, precision_bits)) for eta in BARD_TABLE_ETAS]


def cbw_success(eta: RationalLike, precision_bits: int) -> HighPrecisionReal:
    """1 - exp(-eta): f has a fixed point and it lies in the known fraction."""
    return 1 - exp_rational(-_eta(eta), precision_bits)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    standard_error: float
    trials: int

    def to_dict(self) -> Dict[str, float]:
        return {'mean': self.mean, 'standard_error': self.standard_error, 'trials': self.trials}


def bard_success_monte_carlo(eta: RationalLike, trials: int, seed: int) -> MonteCarloEstimate:
    """Poisson(1) fixed points, each known with probability eta; success at two or more."""
    eta = float(_eta(eta))
    if trials < 2:
        raise DomainError("need at least two trials")
    rng = np.random.default_rng(seed)
    fixed = rng.poisson(1.0, size=trials)
    known = rng.binomial(fixed, eta)
    hits = (known >= 2).astype(np.float64)
    mean = float(hits.mean())
    return MonteCarloEstimate(mean, float(hits.std(ddof=1) / math.sqrt(trials)), trials)


def expected_fixpoints_in_fraction(k: int, fraction: RationalLike) -> Fraction:
    """tau(k) * fraction: expected fixed points of pi**k met when searching that share of the domain."""
    fraction = as_rational(fraction)
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    return divisor_profile(k).tau * fraction


def distinguisher_accuracy(p_found_cipher: RationalLike, p_no_fix_random: RationalLike) -> float:
    """Correct-guess rate with equal priors: say "cipher" iff a fixed point turns up."""
    a, b = as_rational(p_found_cipher), as_rational(p_no_fix_random)
    if not (0 <= a <= 1 and 0 <= b <= 1):
        raise DomainError("probabilities must lie in [0, 1]")
    return float((a + b) / 2)


@dataclass(frozen=True)
class DistinguisherSetting:
    label: str
    k: int
    search_fraction: Fraction
    p_no_fix_random: float
    p_no_fix_cipher: float

    def __post_init__(self):
        for p in (self.p_no_fix_random, self.p_no_fix_cipher):
            if not 0 <= p <= 1:
                raise DomainError("probabilities must lie in [0, 1]")

    @property
    def p_found_cipher(self) -> float:
        return 1.0 - self.p_no_fix_cipher

    @property
    def accuracy(self) -> float:
        return distinguisher_accuracy(self.p_found_cipher, self.p_no_fix_random)

    def to_record(self) -> Dict[str, object]:
        return {
            'label': self.label, 'k': self.k, 'search_fraction': str(self.search_fraction),
            'p_no_fix_cipher': self.p_no_fix_cipher, 'p_found_cipher': self.p_found_cipher,
            'accuracy': self.accuracy,
        }


# (label, k, P(no fixed point found)) measured with n = 10**4 and a 1/64 search.
OBSERVED_NO_FIX = (
    ('Random', 1, 0.985041),
    ('Alice', 1000000, 0.797284),
    ('Bob', 1081079, 0.984409),
    ('Charlie', CHARLIE_K, 0.418335),
)


def distinguisher_table(theoretical: bool = False, precision_bits: int = 128,
                        fraction: RationalLike = SEARCH_FRACTION) -> List[DistinguisherSetting]:
    """The four iteration counts with their distinguisher accuracies.

    Observed rows use the measured rates; theoretical rows evaluate the
    fixed-point generating function at exp(-fraction), the n -> infinity value
    of E[(1 - c/n)**(n * fraction)].
    """
    fraction = as_rational(fraction)
    if not theoretical:
        if fraction != SEARCH_FRACTION:
            raise DomainError("observed rates exist only for a 1/64 search fraction")
        random_rate = OBSERVED_NO_FIX[0][2]
        return [DistinguisherSetting(label, k, fraction, random_rate, rate)
                for label, k, rate in OBSERVED_NO_FIX]
    x = exp_rational(-fraction, precision_bits)
    rates = [(label, k, float(pgf_eval(k, x, precision_bits))) for label, k, _ in OBSERVED_NO_FIX]
    random_rate = rates[0][2]
    return [DistinguisherSetting(label, k, fraction, random_rate, rate) for label, k, rate in rates]


def distinguisher_speedup_log2(block_bits: int = 64, key_bits: int = 112,
                               fraction: RationalLike = SEARCH_FRACTION) -> float:
    """log2 of brute force over the plaintexts checked: 2**112 / 2**58 = 2**54 by default."""
    fraction = as_rational(fraction)
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    checked = block_bits + math.log2(fraction.numerator) - math.log2(fraction.denominator)
    return key_bits - checked


@dataclass(frozen=True)
class KeyRecoveryCost:
    """log2 costs of the n-run key recovery (all counts are encryptions)."""
    run_count: int
    stage1_log2: float
    stage2_log2: float
    total_log2: float
    success_probability: float
    success_log2: float
    candidate_list_log2: float
    brute_force_log2: float
    speedup_log2: float

    @property
    def filtered(self) -> bool:
        return self.run_count > 0

    def to_dict(self) -> Dict[str, object]:
        return {
            'run_count': self.run_count,
            'stage1_log2': self.stage1_log2,
            'stage2_log2': self.stage2_log2,
            'total_log2': self.total_log2,
            'success_probability': self.success_probability,
            'success_log2': self.success_log2,
            'candidate_list_log2': self.candidate_list_log2,
            'brute_force_log2': self.brute_force_log2,
            'speedup_log2': self.speedup_log2,
            'filtered': self.filtered,
            'figure_of_merit': FIGURE_OF_MERIT,
        }


FIGURE_OF_MERIT = ("speedup_log2 = (brute_force_log2 + success_log2) - total_log2: "
                   "brute force at equal success probability over the attack cost")


def _mp(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def _rate(p: RationalLike) -> Fraction:
    p = as_rational(p)
    if not 0 < p < 1:
        raise DomainError("rates must lie strictly between 0 and 1")
    return p


def theoretical_rates(precision_bits: int = 128) -> Tuple[Fraction, Fraction]:
    """(random, k = 1081080) fixed-point discovery rates from the generating function at exp(-1/64)."""
    x = exp_rational(-SEARCH_FRACTION, precision_bits)
    found = [1 - float(pgf_eval(k, x, precision_bits)) for k in (1, CHARLIE_K)]
    return as_rational(found[0]), as_rational(found[1])


def stage1_limit_log2(fp_random: RationalLike = FP_RANDOM) -> float:
    """Stage-one cost as the run count grows without bound."""
    with mpmath.workprec(COST_PRECISION_BITS):
        value = (mpmath.log(STAGE1_FACTOR, 2) + (OUTER_BLOCK_BITS - 6) + INNER_KEY_BITS
                 - mpmath.log(1 - _mp(_rate(fp_random)), 2))
        return float(value)


def key_recovery_cost(run_count: int, fp_random: RationalLike = FP_RANDOM,
                      find_rate: RationalLike = FIND_CHARLIE) -> KeyRecoveryCost:
    """Cost of n filtering runs followed by the exhaustive second stage.

    Each run scans 1/64 of the 2**128 outer plaintexts for every inner key still
    on the list; the list shrinks by 0.014959 per run while the true key
    survives with probability 0.581665.
    """
    n = int(run_count)
    if n < 0:
        raise DomainError("run count must be non-negative")
    with mpmath.workprec(COST_PRECISION_BITS):
        fp, find = _mp(_rate(fp_random)), _mp(_rate(find_rate))
        per_run = mpmath.mpf(STAGE1_FACTOR) * mpmath.ldexp(1, OUTER_BLOCK_BITS - 6 + INNER_KEY_BITS)
        stage1 = per_run * (1 - fp ** (n + 1)) / (1 - fp)
        brute = mpmath.mpf(STAGE2_FACTOR) * mpmath.ldexp(1, 2 * INNER_KEY_BITS)
        stage2 = brute * fp ** n
        success = find ** n
        candidates = fp ** n * (mpmath.ldexp(1, INNER_KEY_BITS) - 1) + success
        log2 = lambda v: mpmath.log(v, 2)
        total_log2 = log2(stage1 + stage2)
        success_log2 = log2(success)
        brute_log2 = log2(brute)
        cost = KeyRecoveryCost(
            run_count=n,
            stage1_log2=float(log2(stage1)),
            stage2_log2=float(log2(stage2)),
            total_log2=float(total_log2),
            success_probability=float(success),
            success_log2=float(success_log2),
            candidate_list_log2=float(log2(candidates)),
            brute_force_log2=float(brute_log2),
            speedup_log2=float(brute_log2 + success_log2 - total_log2),
        )
    return cost


def key_recovery_optimize(max_runs: int = MAX_RUNS, fp_random: RationalLike = FP_RANDOM,
                          find_rate: RationalLike = FIND_CHARLIE) -> Tuple[int, KeyRecoveryCost]:
    """Run count in 0..max_runs maximising the speedup; ties go to fewer runs."""
    if max_runs < 0:
        raise DomainError("max_runs must be non-negative")
    best = None
    for n in range(max_runs + 1):
        cost = key_recovery_cost(n, fp_random, find_rate)
        if best is None or cost.speedup_log2 > best.speedup_log2:
            best = cost
    logger.info(f"key recovery optimum: n={best.run_count}, speedup 2^{best.speedup_log2:.3f}")
    return best.run_count, best
