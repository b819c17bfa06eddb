#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exact truncated power series over the rationals.

``TruncatedSeries`` is a dense coefficient tuple up to a truncation order N;
``BivariateSeries`` is a sparse map (s, t) -> coefficient of y**s z**t with
total degree at most N. Binary operations truncate to the smaller order.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import mpmath

from errors import DomainError
from exactnum import HighPrecisionReal, RationalLike, as_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients a_0..a_N of a power series in z, exact to order N."""
    coefficients: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise DomainError("a series needs at least the constant coefficient")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def from_coefficients(cls, coefficients: Iterable[RationalLike], order: int = None) -> 'TruncatedSeries':
        coeffs = [as_rational(c) for c in coefficients]
        if order is None:
            order = max(len(coeffs) - 1, 0)
        if order < 0:
            raise DomainError("truncation order must be non-negative")
        coeffs = (coeffs + [ZERO] * (order + 1))[:order + 1]
        return cls(tuple(coeffs))

    @classmethod
    def zero(cls, order: int) -> 'TruncatedSeries':
        return cls.from_coefficients([], order)

    @classmethod
    def one(cls, order: int) -> 'TruncatedSeries':
        return cls.from_coefficients([1], order)

    @classmethod
    def monomial(cls, coefficient: RationalLike, power: int, order: int) -> 'TruncatedSeries':
        coeffs = [ZERO] * (order + 1)
        if power <= order:
            coeffs[power] = as_rational(coefficient)
        return cls(tuple(coeffs))

    @classmethod
    def variable(cls, order: int) -> 'TruncatedSeries':
        return cls.monomial(1, 1, order)

    def __getitem__(self, i: int) -> Fraction:
        return ts_coeff(self, i)

    def __add__(self, other):
        return ts_add(self, other)

    def __sub__(self, other):
        return ts_sub(self, other)

    def __neg__(self):
        return ts_neg(self)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return ts_mul(self, other)
        return ts_scale(self, other)

    def __rmul__(self, other):
        return ts_scale(self, other)

    def nonzero_terms(self) -> List[Tuple[int, Fraction]]:
        return [(i, c) for i, c in enumerate(self.coefficients) if c]

    def __str__(self):
        terms = [f"{c}*z^{i}" for i, c in self.nonzero_terms()]
        return (' + '.join(terms) or '0') + f" + O(z^{self.order + 1})"


def ts_truncate(a: TruncatedSeries, order: int) -> TruncatedSeries:
    if order > a.order:
        raise DomainError(f"cannot extend a series known to order {a.order} to {order}")
    return TruncatedSeries(a.coefficients[:order + 1])


def ts_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    n = min(a.order, b.order)
    return TruncatedSeries(tuple(a.coefficients[i] + b.coefficients[i] for i in range(n + 1)))


def ts_neg(a: TruncatedSeries) -> TruncatedSeries:
    return TruncatedSeries(tuple(-c for c in a.coefficients))


def ts_sub(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return ts_add(a, ts_neg(b))


def ts_scale(a: TruncatedSeries, r: RationalLike) -> TruncatedSeries:
    r = as_rational(r)
    return TruncatedSeries(tuple(c * r for c in a.coefficients))


def ts_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product; the EGF of a labelled product."""
    n = min(a.order, b.order)
    out = [ZERO] * (n + 1)
    b_terms = [(j, c) for j, c in enumerate(b.coefficients[:n + 1]) if c]
    for i, ai in enumerate(a.coefficients[:n + 1]):
        if not ai:
            continue
        for j, bj in b_terms:
            if i + j > n:
                break
            out[i + j] += ai * bj
    return TruncatedSeries(tuple(out))


def ts_pow(a: TruncatedSeries, m: int) -> TruncatedSeries:
    if m < 0:
        raise DomainError("negative powers are not supported")
    result = TruncatedSeries.one(a.order)
    base = a
    while m:
        if m & 1:
            result = ts_mul(result, base)
        m >>= 1
        if m:
            base = ts_mul(base, base)
    return result


def ts_derivative(a: TruncatedSeries) -> TruncatedSeries:
    """Formal derivative; the result is exact to order N - 1."""
    if a.order == 0:
        return TruncatedSeries((ZERO,))
    return TruncatedSeries(tuple(i * a.coefficients[i] for i in range(1, a.order + 1)))


def ts_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp(a) for a with zero constant term.

    Uses b' = a' b, i.e. n b_n = sum_{j=1..n} j a_j b_{n-j}; zero coefficients of
    a are skipped, which matters for the sparse divisor series.
    """
    if a.coefficients[0] != 0:
        raise DomainError("ts_exp needs a zero constant term; factor out exp(a_0) numerically")
    n_max = a.order
    weighted = [(j, j * c) for j, c in enumerate(a.coefficients) if j and c]
    b = [ONE] + [ZERO] * n_max
    for n in range(1, n_max + 1):
        acc = ZERO
        for j, ja in weighted:
            if j > n:
                break
            bn = b[n - j]
            if bn:
                acc += ja * bn
        b[n] = acc / n
    logger.debug(f"ts_exp: order {n_max}, {len(weighted)} non-zero input terms")
    return TruncatedSeries(tuple(b))


def ts_log_inv_one_minus_z(order: int) -> TruncatedSeries:
    """log(1/(1-z)) = sum z**i / i."""
    if order < 0:
        raise DomainError("truncation order must be non-negative")
    return TruncatedSeries((ZERO,) + tuple(Fraction(1, i) for i in range(1, order + 1)))


def ts_partial_sums(a: TruncatedSeries) -> TruncatedSeries:
    """a(z) / (1 - z)."""
    out, running = [], ZERO
    for c in a.coefficients:
        running += c
        out.append(running)
    return TruncatedSeries(tuple(out))


def ts_one_minus_z_times(a: TruncatedSeries) -> TruncatedSeries:
    """(1 - z) * a(z)."""
    c = a.coefficients
    return TruncatedSeries((c[0],) + tuple(c[i] - c[i - 1] for i in range(1, len(c))))


def ts_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """outer(inner(z)) by Horner's rule; inner must have zero constant term."""
    if inner.coefficients[0] != 0:
        raise DomainError("composition needs an inner series with zero constant term")
    n = min(outer.order, inner.order)
    inner = ts_truncate(inner, n)
    # coefficients of outer above n only reach z**(n+1) and beyond
    result = TruncatedSeries.monomial(outer.coefficients[n], 0, n)
    for i in range(n - 1, -1, -1):
        result = ts_mul(result, inner)
        result = ts_add(result, TruncatedSeries.monomial(outer.coefficients[i], 0, n))
    return result


def ts_coeff(a: TruncatedSeries, i: int) -> Fraction:
    if i < 0 or i > a.order:
        raise DomainError(f"coefficient {i} is outside the truncation order {a.order}")
    return a.coefficients[i]


def ts_egf_counts(a: TruncatedSeries) -> List[int]:
    """n! * a_n for every n; raises if one of them is not an integer."""
    counts = []
    for n, c in enumerate(a.coefficients):
        scaled = c * math.factorial(n)
        if scaled.denominator != 1:
            raise DomainError(f"coefficient {n} times {n}! is not an integer: {scaled}")
        counts.append(scaled.numerator)
    return counts


def ts_eval_hp(a: TruncatedSeries, point: HighPrecisionReal) -> HighPrecisionReal:
    """Evaluate the truncated polynomial at a point (Horner, at the point's precision)."""
    with mpmath.workprec(point.precision_bits):
        acc = mpmath.mpf(0)
        for c in reversed(a.coefficients):
            acc = acc * point.value + mpmath.mpf(c.numerator) / c.denominator
    return HighPrecisionReal(acc, point.precision_bits, point.guard_bits)


Monomial = Tuple[int, int]


@dataclass(frozen=True)
class BivariateSeries:
    """Sparse coefficients of y**s z**t for s + t <= order; absent keys are zero."""
    terms: Mapping[Monomial, Fraction]
    order: int

    @classmethod
    def from_terms(cls, terms: Mapping[Monomial, RationalLike], order: int) -> 'BivariateSeries':
        if order < 0:
            raise DomainError("truncation order must be non-negative")
        clean: Dict[Monomial, Fraction] = {}
        for (s, t), c in terms.items():
            if s < 0 or t < 0:
                raise DomainError("exponents must be non-negative")
            c = as_rational(c)
            if c and s + t <= order:
                clean[(s, t)] = clean.get((s, t), ZERO) + c
        return cls({k: v for k, v in clean.items() if v}, order)

    def __add__(self, other):
        return bv_add(self, other)

    def __sub__(self, other):
        return bv_add(self, bv_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, BivariateSeries):
            return bv_mul(self, other)
        return bv_scale(self, other)

    def homogeneous_parts(self) -> List[Dict[Monomial, Fraction]]:
        parts: List[Dict[Monomial, Fraction]] = [dict() for _ in range(self.order + 1)]
        for (s, t), c in self.terms.items():
            parts[s + t][(s, t)] = c
        return parts


def bv_add(a: BivariateSeries, b: BivariateSeries) -> BivariateSeries:
    order = min(a.order, b.order)
    out: Dict[Monomial, Fraction] = {}
    for src in (a.terms, b.terms):
        for key, c in src.items():
            if sum(key) <= order:
                out[key] = out.get(key, ZERO) + c
    return BivariateSeries({k: v for k, v in out.items() if v}, order)


def bv_scale(a: BivariateSeries, r: RationalLike) -> BivariateSeries:
    r = as_rational(r)
    if not r:
        return BivariateSeries({}, a.order)
    return BivariateSeries({k: c * r for k, c in a.terms.items()}, a.order)


def _poly_mul(p: Mapping[Monomial, Fraction], q: Mapping[Monomial, Fraction], order: int,
              out: Dict[Monomial, Fraction], weight: Fraction = ONE) -> None:
    for (s1, t1), c1 in p.items():
        for (s2, t2), c2 in q.items():
            if s1 + t1 + s2 + t2 > order:
                continue
            key = (s1 + s2, t1 + t2)
            out[key] = out.get(key, ZERO) + weight * c1 * c2


def bv_mul(a: BivariateSeries, b: BivariateSeries) -> BivariateSeries:
    order = min(a.order, b.order)
    out: Dict[Monomial, Fraction] = {}
    _poly_mul(a.terms, b.terms, order, out)
    return BivariateSeries({k: v for k, v in out.items() if v}, order)


def bv_exp(a: BivariateSeries) -> BivariateSeries:
    """exp(a) for zero constant term, by the exp recurrence on total-degree parts."""
    if a.terms.get((0, 0), ZERO) != 0:
        raise DomainError("bv_exp needs a zero constant term")
    parts = a.homogeneous_parts()
    b: List[Dict[Monomial, Fraction]] = [{(0, 0): ONE}]
    for n in range(1, a.order + 1):
        acc: Dict[Monomial, Fraction] = {}
        for j in range(1, n + 1):
            if parts[j] and b[n - j]:
                _poly_mul(parts[j], b[n - j], a.order, acc, Fraction(j))
        b.append({k: v / n for k, v in acc.items() if v})
    merged: Dict[Monomial, Fraction] = {}
    for part in b:
        merged.update(part)
    return BivariateSeries(merged, a.order)


def bv_partial_y(a: BivariateSeries) -> BivariateSeries:
    """d/dy; the result is exact to total degree N - 1."""
    terms = {(s - 1, t): s * c for (s, t), c in a.terms.items() if s > 0}
    return BivariateSeries(terms, max(a.order - 1, 0))


def bv_diagonal(a: BivariateSeries) -> TruncatedSeries:
    """Substitute y := z."""
    coeffs = [ZERO] * (a.order + 1)
    for (s, t), c in a.terms.items():
        coeffs[s + t] += c
    return TruncatedSeries(tuple(coeffs))


def bv_coeff(a: BivariateSeries, s: int, t: int) -> Fraction:
    if s < 0 or t < 0 or s + t > a.order:
        raise DomainError(f"monomial y^{s} z^{t} is outside the truncation order {a.order}")
    return a.terms.get((s, t), ZERO)


def bv_from_y(a: TruncatedSeries) -> BivariateSeries:
    return BivariateSeries({(i, 0): c for i, c in enumerate(a.coefficients) if c}, a.order)


def bv_from_z(a: TruncatedSeries) -> BivariateSeries:
    return BivariateSeries({(0, i): c for i, c in enumerate(a.coefficients) if c}, a.order)


def series_from_terms(terms: Sequence[Tuple[int, RationalLike]], order: int) -> TruncatedSeries:
    """Build a series from (power, coefficient) pairs, dropping powers above order."""
    coeffs = [ZERO] * (order + 1)
    for power, c in terms:
        if power <= order:
            coeffs[power] += as_rational(c)
    return TruncatedSeries(tuple(coeffs))
