#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exact rationals, guarded high-precision reals and divisor arithmetic.

Rationals are ``fractions.Fraction`` throughout (always in lowest terms, exact).
Reals are mpmath values wrapped in ``HighPrecisionReal``, which records the
working precision and the guard bits that separate it from the precision we
claim as correct.
"""

import logging
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import mpmath
import numpy as np
import sympy

from errors import DomainError

logger = logging.getLogger(__name__)

BigRational = Fraction

DEFAULT_GUARD_BITS = 32
MIN_PRECISION_BITS = 64
MAX_DIVISOR_ARGUMENT = 1 << 64

RationalLike = Union[int, str, float, Fraction]


def as_rational(x: RationalLike) -> Fraction:
    """Convert an int, decimal string, float or Fraction to an exact rational.

    Floats go through their shortest decimal repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"not a rational number: {x!r}") from e
    try:
        return Fraction(operator.index(x))
    except TypeError:
        return Fraction(x)


def _check_precision(precision_bits: int) -> int:
    bits = operator.index(precision_bits)
    if bits < MIN_PRECISION_BITS:
        raise DomainError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    return bits


@dataclass(frozen=True)
class HighPrecisionReal:
    """An mpmath real computed at ``precision_bits`` working precision.

    The value is claimed correct to ``precision_bits - guard_bits`` bits, i.e.
    the absolute error is at most ``2**-(precision_bits - guard_bits)`` times
    ``max(1, |value|)``. Every producer in this package keeps its accumulated
    rounding error below that bound.
    """
    value: mpmath.mpf
    precision_bits: int
    guard_bits: int = DEFAULT_GUARD_BITS

    @property
    def claimed_bits(self) -> int:
        return self.precision_bits - self.guard_bits

    def tolerance(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision_bits):
            return mpmath.ldexp(mpmath.mpf(1), -self.claimed_bits) * max(mpmath.mpf(1), abs(self.value))

    def _coerce(self, other) -> 'HighPrecisionReal':
        if isinstance(other, HighPrecisionReal):
            return other
        return from_rational(as_rational(other), self.precision_bits)

    def _combine(self, other, op) -> 'HighPrecisionReal':
        other = self._coerce(other)
        bits = min(self.precision_bits, other.precision_bits)
        guard = max(self.guard_bits, other.guard_bits)
        with mpmath.workprec(bits):
            return HighPrecisionReal(op(self.value, other.value), bits, guard)

    def __add__(self, other):
        return self._combine(other, operator.add)

    def __radd__(self, other):
        return self._coerce(other)._combine(self, operator.add)

    def __sub__(self, other):
        return self._combine(other, operator.sub)

    def __rsub__(self, other):
        return self._coerce(other)._combine(self, operator.sub)

    def __mul__(self, other):
        return self._combine(other, operator.mul)

    def __rmul__(self, other):
        return self._coerce(other)._combine(self, operator.mul)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.value == 0:
            raise DomainError("division by zero")
        return self._combine(other, operator.truediv)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return HighPrecisionReal(-self.value, self.precision_bits, self.guard_bits)

    def __abs__(self):
        return HighPrecisionReal(abs(self.value), self.precision_bits, self.guard_bits)

    def __lt__(self, other):
        return self.value < self._coerce(other).value

    def __le__(self, other):
        return self.value <= self._coerce(other).value

    def __gt__(self, other):
        return self.value > self._coerce(other).value

    def __ge__(self, other):
        return self.value >= self._coerce(other).value

    def __float__(self):
        return float(self.value)

    def agrees_with(self, other, bits: Optional[int] = None) -> bool:
        """True when the two values differ by at most 2**-bits (relative above 1)."""
        other = self._coerce(other)
        if bits is None:
            bits = min(self.claimed_bits, other.claimed_bits)
        with mpmath.workprec(max(self.precision_bits, other.precision_bits)):
            scale = max(mpmath.mpf(1), abs(self.value))
            return abs(self.value - other.value) <= mpmath.ldexp(scale, -bits)

    def to_fixed(self, decimals: int) -> str:
        """Round to a fixed number of decimals and format, e.g. ``0.19302529``."""
        with mpmath.workprec(self.precision_bits):
            scaled = int(mpmath.nint(self.value * mpmath.mpf(10) ** decimals))
        sign = '-' if scaled < 0 else ''
        digits = str(abs(scaled)).rjust(decimals + 1, '0')
        if decimals == 0:
            return sign + digits
        return f"{sign}{digits[:-decimals]}.{digits[-decimals:]}"

    def to_decimal(self, digits: Optional[int] = None) -> str:
        if digits is None:
            digits = max(1, int(self.claimed_bits * math.log10(2)))
        with mpmath.workprec(self.precision_bits):
            return mpmath.nstr(self.value, digits)

    def to_json(self) -> Dict[str, object]:
        return {'decimal': self.to_decimal(), 'bits': self.claimed_bits}

    def __repr__(self):
        return f"HighPrecisionReal({self.to_decimal(20)}, bits={self.precision_bits})"


def from_rational(r: RationalLike, precision_bits: int) -> HighPrecisionReal:
    """Round an exact rational to a high-precision real (error below one ulp)."""
    bits = _check_precision(precision_bits)
    r = as_rational(r)
    with mpmath.workprec(bits):
        value = mpmath.mpf(r.numerator) / r.denominator
    return HighPrecisionReal(value, bits)


def exp_rational(r: RationalLike, precision_bits: int) -> HighPrecisionReal:
    """e**r for an exact rational exponent."""
    return exp_hp(from_rational(r, precision_bits))


def _to_hp(x, precision_bits: Optional[int]) -> HighPrecisionReal:
    if isinstance(x, HighPrecisionReal):
        if precision_bits is None or precision_bits == x.precision_bits:
            return x
        with mpmath.workprec(precision_bits):
            return HighPrecisionReal(+x.value, precision_bits, x.guard_bits)
    if precision_bits is None:
        raise DomainError("precision_bits is required for non-HighPrecisionReal input")
    return from_rational(as_rational(x), precision_bits)


def exp_hp(x, precision_bits: Optional[int] = None) -> HighPrecisionReal:
    x = _to_hp(x, precision_bits)
    if not mpmath.isfinite(x.value):
        raise DomainError("exp of a non-finite value")
    with mpmath.workprec(x.precision_bits):
        return HighPrecisionReal(mpmath.exp(x.value), x.precision_bits, x.guard_bits)


def pow_hp(base, exponent, precision_bits: Optional[int] = None) -> HighPrecisionReal:
    """base**exponent; a negative base is only allowed with an integral exponent."""
    base = _to_hp(base, precision_bits)
    exponent = base._coerce(exponent) if not isinstance(exponent, HighPrecisionReal) else exponent
    bits = min(base.precision_bits, exponent.precision_bits)
    with mpmath.workprec(bits):
        if base.value < 0 and not mpmath.isint(exponent.value):
            raise DomainError("negative base with a non-integral exponent")
        if base.value == 0 and exponent.value < 0:
            raise DomainError("zero raised to a negative power")
        return HighPrecisionReal(mpmath.power(base.value, exponent.value), bits, base.guard_bits)


def log2_hp(x, precision_bits: Optional[int] = None) -> HighPrecisionReal:
    x = _to_hp(x, precision_bits)
    if x.value <= 0:
        raise DomainError("log2 of a non-positive value")
    with mpmath.workprec(x.precision_bits):
        return HighPrecisionReal(mpmath.log(x.value, 2), x.precision_bits, x.guard_bits)


def const_e(precision_bits: int) -> HighPrecisionReal:
    """e = sum of 1/i! in fixed point.

    Each truncated term loses under one unit in the last place of the
    ``precision_bits + guard`` working scale, and the omitted tail after the
    last non-zero term is below two units, so the total error stays far below
    ``2**-precision_bits``.
    """
    bits = _check_precision(precision_bits)
    wp = bits + DEFAULT_GUARD_BITS
    total, term, i = 0, 1 << wp, 0
    while term:
        total += term
        i += 1
        term //= i
    logger.debug(f"const_e: {i} terms at {wp} fixed-point bits")
    with mpmath.workprec(bits):
        return HighPrecisionReal(mpmath.ldexp(mpmath.mpf(total), -wp), bits)


def const_zeta2(precision_bits: int) -> HighPrecisionReal:
    bits = _check_precision(precision_bits)
    with mpmath.workprec(bits + DEFAULT_GUARD_BITS):
        value = mpmath.pi ** 2 / 6
    with mpmath.workprec(bits):
        return HighPrecisionReal(+value, bits)


def const_zeta3(precision_bits: int) -> HighPrecisionReal:
    """zeta(3) = 5/2 * sum (-1)**(n+1) / (n**3 * C(2n, n)).

    Terms shrink by roughly a factor four; the series alternates with
    decreasing terms, so the error after stopping is below the first omitted
    term, which is below one fixed-point unit.
    """
    bits = _check_precision(precision_bits)
    wp = bits + DEFAULT_GUARD_BITS
    scale = 5 << wp
    total, n, central = 0, 1, 2
    while True:
        term = scale // (2 * n ** 3 * central)
        if term == 0:
            break
        total += term if n % 2 else -term
        n += 1
        central = central * (2 * n) * (2 * n - 1) // (n * n)
    logger.debug(f"const_zeta3: {n - 1} terms at {wp} fixed-point bits")
    with mpmath.workprec(bits):
        return HighPrecisionReal(mpmath.ldexp(mpmath.mpf(total), -wp), bits)


def partial_zeta(s: int, terms: int) -> float:
    """Double-precision partial sum of i**-s for i <= terms (cross-checks only)."""
    if terms < 1:
        raise DomainError("terms must be positive")
    idx = np.arange(terms, 0, -1, dtype=np.float64)
    return float(np.sum(idx ** (-float(s))))


@dataclass(frozen=True)
class DivisorProfile:
    """All positive divisors of k with tau(k) and sigma(k)."""
    k: int
    divisors: Tuple[int, ...]
    tau: int
    sigma: int

    @property
    def sigma_over_k(self) -> Fraction:
        return Fraction(self.sigma, self.k)

    def reciprocal_sum(self) -> Fraction:
        return sum((Fraction(1, d) for d in self.divisors), Fraction(0))

    def divisors_up_to(self, limit: int) -> List[int]:
        return [d for d in self.divisors if d <= limit]


def _positive_int(k, name: str = 'k') -> int:
    if isinstance(k, bool):
        raise DomainError(f"{name} must be an integer")
    try:
        value = operator.index(k)
    except TypeError:
        raise DomainError(f"{name} must be an integer, got {k!r}")
    if value < 1:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def divisor_profile(k: int) -> DivisorProfile:
    """Divisors, tau and sigma of 1 <= k < 2**64."""
    k = _positive_int(k)
    if k >= MAX_DIVISOR_ARGUMENT:
        raise DomainError("k must fit in 64 bits")
    divisors = tuple(int(d) for d in sympy.divisors(k))
    return DivisorProfile(k=k, divisors=divisors, tau=len(divisors), sigma=sum(divisors))


def _multiplicative_partitions(t: int, largest: int):
    if t == 1:
        yield []
        return
    for f in range(min(t, largest), 1, -1):
        if t % f == 0:
            for rest in _multiplicative_partitions(t // f, f):
                yield [f] + rest


def smallest_with_tau(t: int) -> int:
    """Least positive integer with exactly t divisors.

    The minimiser has non-increasing exponents on consecutive primes, so it is
    enough to try every factorisation t = f1 * f2 * ... with f1 >= f2 >= ...
    and exponents fi - 1.
    """
    t = _positive_int(t, 't')
    best = None
    for factors in _multiplicative_partitions(t, t):
        candidate = 1
        for i, f in enumerate(factors, start=1):
            candidate *= int(sympy.prime(i)) ** (f - 1)
        if best is None or candidate < best:
            best = candidate
    return best


def is_prime(k: int) -> bool:
    return bool(sympy.isprime(operator.index(k)))


def next_prime(k: int) -> int:
    """Smallest prime >= k."""
    return int(sympy.nextprime(operator.index(k) - 1))
