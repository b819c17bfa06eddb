#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Permutation classes P(A, B): cycle lengths restricted to A, cycle count to B.

Builds their exact EGFs (alpha/beta composition, exp for unrestricted counts),
the factored q(z) * exp(p(z)) / (1 - z)**m form whose n -> infinity limit is
q(1) * exp(p(1)) when m = 1, and the closed-form probabilities derived from it.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Tuple

from errors import DomainError, UnsupportedError
from exactnum import (
    HighPrecisionReal, const_zeta2, const_zeta3, divisor_profile,
    exp_hp, exp_rational, from_rational, partial_zeta,
)
from series import (
    TruncatedSeries, series_from_terms, ts_compose, ts_exp, ts_mul,
    ts_partial_sums, ts_pow, ts_scale,
)

logger = logging.getLogger(__name__)

DEFAULT_CONVERGENCE_BITS = 512


class LengthKind(Enum):
    """Variants of a cycle-length set."""
    FINITE = "finite"
    ALL_EXCEPT = "all_except"
    ALL = "all"
    DIVISORS_OF = "divisors_of"
    PERFECT_POWERS = "perfect_powers"


class CountKind(Enum):
    """Variants of a cycle-count set."""
    ALL = "all"
    EXACTLY = "exactly"
    FINITE = "finite"


def _positive_set(values: Iterable[int]) -> FrozenSet[int]:
    out = frozenset(int(v) for v in values)
    if any(v < 1 for v in out):
        raise DomainError("cycle lengths must be positive integers")
    return out


@dataclass(frozen=True)
class CycleLengthSet:
    """The set A of allowed cycle lengths."""
    kind: LengthKind
    values: FrozenSet[int] = frozenset()
    parameter: int = 0

    @classmethod
    def finite(cls, values: Iterable[int]) -> 'CycleLengthSet':
        return cls(LengthKind.FINITE, _positive_set(values))

    @classmethod
    def all_except(cls, values: Iterable[int]) -> 'CycleLengthSet':
        return cls(LengthKind.ALL_EXCEPT, _positive_set(values))

    @classmethod
    def all(cls) -> 'CycleLengthSet':
        return cls(LengthKind.ALL)

    @classmethod
    def divisors_of(cls, k: int) -> 'CycleLengthSet':
        profile = divisor_profile(k)
        return cls(LengthKind.DIVISORS_OF, frozenset(profile.divisors), profile.k)

    @classmethod
    def perfect_powers(cls, exponent: int) -> 'CycleLengthSet':
        if exponent < 1:
            raise DomainError("exponent must be positive")
        return cls(LengthKind.PERFECT_POWERS, frozenset(), exponent)

    def contains(self, length: int) -> bool:
        if self.kind in (LengthKind.FINITE, LengthKind.DIVISORS_OF):
            return length in self.values
        if self.kind == LengthKind.ALL_EXCEPT:
            return length >= 1 and length not in self.values
        if self.kind == LengthKind.ALL:
            return length >= 1
        root = round(length ** (1.0 / self.parameter))
        return any(r >= 1 and r ** self.parameter == length for r in (root - 1, root, root + 1))

    def members_up_to(self, limit: int) -> List[int]:
        if self.kind in (LengthKind.FINITE, LengthKind.DIVISORS_OF):
            return sorted(v for v in self.values if v <= limit)
        if self.kind == LengthKind.PERFECT_POWERS:
            out, r = [], 1
            while r ** self.parameter <= limit:
                out.append(r ** self.parameter)
                r += 1
            return out
        return [i for i in range(1, limit + 1) if self.contains(i)]

    def prohibited_lengths(self) -> FrozenSet[int]:
        """Finite prohibited set for the factored form.

        ``DivisorsOf(k)`` is read as its complement here: the class of
        permutations avoiding every divisor length, i.e. pi**k is a derangement.
        """
        if self.kind == LengthKind.ALL:
            return frozenset()
        if self.kind in (LengthKind.ALL_EXCEPT, LengthKind.DIVISORS_OF):
            return self.values
        raise UnsupportedError(f"{self.kind.value} cycle lengths leave an infinite prohibited set")


@dataclass(frozen=True)
class CycleCountSet:
    """The set B of allowed cycle counts."""
    kind: CountKind
    values: FrozenSet[int] = frozenset()

    @classmethod
    def all(cls) -> 'CycleCountSet':
        return cls(CountKind.ALL)

    @classmethod
    def exactly(cls, t: int) -> 'CycleCountSet':
        if t < 0:
            raise DomainError("cycle count must be non-negative")
        return cls(CountKind.EXACTLY, frozenset([int(t)]))

    @classmethod
    def finite(cls, values: Iterable[int]) -> 'CycleCountSet':
        out = frozenset(int(v) for v in values)
        if any(v < 0 for v in out):
            raise DomainError("cycle counts must be non-negative")
        return cls(CountKind.FINITE, out)

    def contains(self, t: int) -> bool:
        return self.kind == CountKind.ALL or t in self.values


@dataclass(frozen=True)
class StructuredEGF:
    """q(z) * exp(p(z)) / (1 - z)**m with exact polynomials p (p(0) = 0) and q."""
    pole_order: int
    exp_polynomial: Tuple[Fraction, ...]
    prefactor: Tuple[Fraction, ...] = (Fraction(1),)

    def __post_init__(self):
        if self.pole_order < 0:
            raise DomainError("pole order must be non-negative")
        if self.exp_polynomial and self.exp_polynomial[0] != 0:
            raise DomainError("the exponent polynomial must vanish at 0")

    def expand(self, order: int) -> TruncatedSeries:
        """Exact coefficients up to z**order."""
        p = series_from_terms(list(enumerate(self.exp_polynomial)), order)
        q = series_from_terms(list(enumerate(self.prefactor)), order)
        result = ts_mul(q, ts_exp(p))
        for _ in range(self.pole_order):
            result = ts_partial_sums(result)
        return result

    def describe(self) -> str:
        def poly(cs):
            terms = [f"{c}*z^{i}" for i, c in enumerate(cs) if c]
            return ' + '.join(terms) or '0'
        return f"({poly(self.prefactor)}) * exp({poly(self.exp_polynomial)}) / (1-z)^{self.pole_order}"


def alpha_series(lengths: CycleLengthSet, order: int) -> TruncatedSeries:
    """sum over allowed lengths i <= order of z**i / i."""
    if order < 0:
        raise DomainError("truncation order must be non-negative")
    return series_from_terms([(i, Fraction(1, i)) for i in lengths.members_up_to(order)], order)


def beta_series(counts: CycleCountSet, order: int) -> TruncatedSeries:
    """sum over allowed counts t of z**t / t!."""
    if counts.kind == CountKind.ALL:
        powers = range(order + 1)
    else:
        powers = [t for t in counts.values if t <= order]
    return series_from_terms([(t, Fraction(1, math.factorial(t))) for t in powers], order)


def class_egf_series(lengths: CycleLengthSet, counts: CycleCountSet, order: int) -> TruncatedSeries:
    """EGF of P(A, B) to the given order: beta(alpha(z)), or exp(alpha) when B is unrestricted."""
    alpha = alpha_series(lengths, order)
    if counts.kind == CountKind.ALL:
        return ts_exp(alpha)
    return ts_compose(beta_series(counts, order), alpha)


def exactly_t_cycles_series(lengths: CycleLengthSet, t: int, order: int) -> TruncatedSeries:
    """alpha(z)**t / t!, the EGF of exactly t cycles with lengths in A."""
    return ts_scale(ts_pow(alpha_series(lengths, order), t), Fraction(1, math.factorial(t)))


def class_egf_structured(lengths: CycleLengthSet, extra_factor: Optional[int] = None) -> StructuredEGF:
    """Factored EGF exp(-sum_{i prohibited} z**i / i) / (1 - z), optionally times z**c / c!."""
    prohibited = lengths.prohibited_lengths()
    top = max(prohibited, default=0)
    p = [Fraction(0)] * (top + 1)
    for i in prohibited:
        p[i] = Fraction(-1, i)
    if extra_factor is None:
        q = (Fraction(1),)
    else:
        if extra_factor < 0:
            raise DomainError("extra factor power must be non-negative")
        q = tuple([Fraction(0)] * extra_factor + [Fraction(1, math.factorial(extra_factor))])
    return StructuredEGF(pole_order=1, exp_polynomial=tuple(p), prefactor=q)


def joint_c1_c2_egf(c1: int, c2: int) -> StructuredEGF:
    """Exactly c1 fixed points and c2 cycles of length 2, 4 or 8; other lengths free."""
    if c1 < 0 or c2 < 0:
        raise DomainError("counts must be non-negative")
    order = c1 + 8 * c2
    fixed = TruncatedSeries.monomial(Fraction(1, math.factorial(c1)), c1, order)
    short = series_from_terms([(2, Fraction(1, 2)), (4, Fraction(1, 4)), (8, Fraction(1, 8))], order)
    q = ts_scale(ts_mul(fixed, ts_pow(short, c2)), Fraction(1, math.factorial(c2)))
    base = class_egf_structured(CycleLengthSet.divisors_of(8))
    return StructuredEGF(1, base.exp_polynomial, q.coefficients)


def limit_probability(f: StructuredEGF, precision_bits: int) -> HighPrecisionReal:
    """lim (1 - z) f(z) at z = 1, i.e. q(1) * exp(p(1)), for pole order one."""
    if f.pole_order == 0:
        raise DomainError("pole order 0: (1-z)f(z) vanishes at z=1, the limiting probability is 0")
    if f.pole_order > 1:
        raise DomainError(f"pole order {f.pole_order}: (1-z)f(z) diverges at z=1")
    exponent = sum(f.exp_polynomial, Fraction(0))
    weight = sum(f.prefactor, Fraction(0))
    return exp_rational(exponent, precision_bits) * weight


def prob_no_cycles_in(lengths: Iterable[int], precision_bits: int) -> HighPrecisionReal:
    """Limit probability of no cycle with length in a finite set: exp(-sum 1/i)."""
    lengths = _positive_set(lengths)
    exponent = -sum((Fraction(1, i) for i in lengths), Fraction(0))
    return exp_rational(exponent, precision_bits)


def prob_no_k_cycles(k: int, precision_bits: int) -> HighPrecisionReal:
    return prob_no_cycles_in([k], precision_bits)


def prob_derangement(precision_bits: int) -> HighPrecisionReal:
    return limit_probability(class_egf_structured(CycleLengthSet.all_except([1])), precision_bits)


def prob_exactly_c_fixed_points(c: int, precision_bits: int) -> HighPrecisionReal:
    """1 / (c! e)."""
    f = class_egf_structured(CycleLengthSet.all_except([1]), extra_factor=c)
    return limit_probability(f, precision_bits)


def joint_prob_c1_c2(c1: int, c2: int, precision_bits: int) -> HighPrecisionReal:
    """(7/8)**c2 / (c1! c2!) * exp(-15/8)."""
    if c1 < 0 or c2 < 0:
        raise DomainError("counts must be non-negative")
    weight = Fraction(7, 8) ** c2 / (math.factorial(c1) * math.factorial(c2))
    return exp_rational(Fraction(-15, 8), precision_bits) * weight


def prob_no_powerlength_cycles(exponent: int, precision_bits: int) -> HighPrecisionReal:
    """No cycle whose length is a perfect square (2) or cube (3): exp(-zeta(e))."""
    if exponent == 2:
        return exp_hp(-const_zeta2(precision_bits))
    if exponent == 3:
        return exp_hp(-const_zeta3(precision_bits))
    raise UnsupportedError(f"no closed form implemented for exponent {exponent}")


def prob_no_powerlength_cycles_partial(exponent: int, terms: int) -> float:
    """Same probability with zeta(e) replaced by a double-precision partial sum."""
    return math.exp(-partial_zeta(exponent, terms))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    coefficient: Fraction
    distance: HighPrecisionReal


def convergence_report(f: StructuredEGF, order: int,
                       precision_bits: int = DEFAULT_CONVERGENCE_BITS) -> List[ConvergenceRow]:
    """|A_n/n! - limit| for n = 0..order, from the exact expansion."""
    if order > 5000:
        raise DomainError("convergence reports are limited to order 5000")
    limit = limit_probability(f, precision_bits)
    expanded = f.expand(order)
    logger.info(f"convergence report: order {order} at {precision_bits} bits")
    return [
        ConvergenceRow(n, c, abs(from_rational(c, precision_bits) - limit))
        for n, c in enumerate(expanded.coefficients)
    ]
