#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Reproduction battery behind ``permcycle paper-check``.

Every check returns a CheckResult with a name, a pass flag and a detail dict
of the numbers it compared. Quick mode shrinks trial counts and search grids
so the whole battery runs as a smoke test; it never drops a check.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

import mpmath
import numpy as np

from classes import (
    CycleCountSet, CycleLengthSet, class_egf_series, class_egf_structured, convergence_report,
    limit_probability, prob_derangement, prob_exactly_c_fixed_points, prob_no_k_cycles,
    prob_no_powerlength_cycles,
)
from costmodel import (
    OBSERVED_NO_FIX, bard_half_success_eta, bard_success, bard_table, distinguisher_table,
    key_recovery_cost, key_recovery_optimize, stage1_limit_log2,
)
from errors import PermCycleError
from exactnum import const_e, divisor_profile, exp_rational
from fixpoints import (
    expected_fixed_points, fixpoint_distribution, pgf_eval, prob_power_derangement,
    restricted_pair_expectation, restricted_workload_expectation,
)
from keeloq import (
    KEELOQ, MiniParams, bard_attack, build_codebook, cbw_attack, f_fixed_point_profile, find_key,
    mini_decrypt, mini_encrypt, mini_f, mini_f_power, mini_g, run_attack_trials,
)
from permlab import cycle_type_census, experiment_iterated_fixpoints, trial_rng

logger = logging.getLogger(__name__)

TABLE1_PERCENT = (0.47, 1.75, 3.69, 6.16, 9.02, 12.19, 15.58, 19.12, 22.75, 26.42)
PRINTED_ACCURACY = {'Alice': 0.5939, 'Bob': 0.5003, 'Charlie': 0.7834}
ZETA_DECIMALS = {2: '0.19302529', 3: '0.30057532'}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: Dict[str, object] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> Dict[str, object]:
        out = {'name': self.name, 'passed': self.passed, 'detail': self.detail}
        if include_timing:
            out['wall_time'] = self.wall_time
        return out


def check_convergence(quick: bool, workers: int, bits: int) -> CheckResult:
    f = class_egf_structured(CycleLengthSet.all_except([4]))
    rows = convergence_report(f, 200, 512)
    distance = rows[200].distance
    bound = mpmath.ldexp(1, -321)
    return CheckResult('convergence_precision', distance.value < bound,
                       {'order': 200, 'log2_distance': float(mpmath.log(distance.value, 2)),
                        'log2_bound': -321})


def _census_count(census, lengths: CycleLengthSet, counts: CycleCountSet) -> int:
    return sum(m for cycle_type, m in census.items()
               if counts.contains(len(cycle_type)) and all(lengths.contains(l) for l in cycle_type))


def check_oracle(quick: bool, workers: int, bits: int) -> CheckResult:
    top = 4 if quick else 6
    censuses = {n: cycle_type_census(n) for n in range(1, top + 1)}
    compared = mismatches = 0
    for a_size in range(1, top + 1):
        for a in itertools.combinations(range(1, top + 1), a_size):
            lengths = CycleLengthSet.finite(a)
            for b_size in range(1, top + 2):
                for b in itertools.combinations(range(top + 1), b_size):
                    counts = CycleCountSet.finite(b)
                    series = class_egf_series(lengths, counts, top)
                    for n in range(top + 1):
                        predicted = series.coefficients[n] * math.factorial(n)
                        actual = (1 if 0 in b else 0) if n == 0 else _census_count(censuses[n], lengths, counts)
                        compared += 1
                        if predicted != actual:
                            mismatches += 1
    spot = [
        (CycleLengthSet.finite([1, 2]), CycleCountSet.all()),
        (CycleLengthSet.finite([2, 3, 4]), CycleCountSet.finite([2, 3])),
        (CycleLengthSet.all_except([1]), CycleCountSet.finite([1, 2, 3])),
    ]
    spot_n = 6 if quick else 8
    census = cycle_type_census(spot_n)
    for lengths, counts in spot:
        predicted = class_egf_series(lengths, counts, spot_n).coefficients[spot_n] * math.factorial(spot_n)
        compared += 1
        if predicted != _census_count(census, lengths, counts):
            mismatches += 1
    return CheckResult('oracle_equivalence', mismatches == 0,
                       {'max_n': top, 'spot_n': spot_n, 'compared': compared, 'mismatches': mismatches})


def check_constants(quick: bool, workers: int, bits: int) -> CheckResult:
    inv_e = 1 / const_e(bits)
    checks = {
        'derangement': prob_derangement(bits).agrees_with(inv_e),
        'no_4_cycles': prob_no_k_cycles(4, bits).agrees_with(exp_rational(Fraction(-1, 4), bits)),
        'power_derangement_8': prob_power_derangement(8, bits).agrees_with(
            limit_probability(class_egf_structured(CycleLengthSet.divisors_of(8)), bits))
        and prob_power_derangement(8, bits).agrees_with(exp_rational(Fraction(-15, 8), bits)),
    }
    for c in range(6):
        checks[f'exactly_{c}_fixed'] = prob_exactly_c_fixed_points(c, bits).agrees_with(
            inv_e / math.factorial(c))
    printed = {e: prob_no_powerlength_cycles(e, bits).to_fixed(8) for e in (2, 3)}
    for e, text in printed.items():
        checks[f'zeta{e}_printed'] = text == ZETA_DECIMALS[e]
    return CheckResult('corollary_constants', all(checks.values()),
                       {'checks': checks, 'printed': {str(e): v for e, v in printed.items()}})


def check_tau(quick: bool, workers: int, bits: int) -> CheckResult:
    expected = {1000000: 49, 1081079: 2, 1081080: 256, 25: 3}
    got = {k: divisor_profile(k).tau for k in expected}
    return CheckResult('tau_identities', got == expected, {str(k): v for k, v in got.items()})


def check_expected_fixed_points(quick: bool, workers: int, bits: int) -> CheckResult:
    series_ok = True
    try:
        for k in range(1, 17):
            expected_fixed_points(k, series_check_max_k=16)
    except PermCycleError as e:
        series_ok = False
        logger.warning(f"series check failed: {e}")
    n, trials = (1000, 2000) if quick else (10000, 100000)
    report = experiment_iterated_fixpoints(n, trials, [1, 8, 25], Fraction(1, 64), seed=5, workers=workers)
    mc = {}
    for row in report.rows:
        tau = divisor_profile(row.k).tau
        mc[str(row.k)] = {'mean': row.mean_fixed_points, 'standard_error': row.fixed_points_standard_error,
                          'tau': tau,
                          'ok': abs(row.mean_fixed_points - tau) <= 5 * row.fixed_points_standard_error}
    passed = series_ok and all(v['ok'] for v in mc.values())
    return CheckResult('expected_fixed_points', passed,
                       {'series_check_k_max': 16, 'series_ok': series_ok, 'n': n, 'trials': trials,
                        'monte_carlo': mc})


def check_fixpoint_distribution(quick: bool, workers: int, bits: int) -> CheckResult:
    base = fixpoint_distribution(1, 20, bits)
    inv_e = exp_rational(-1, bits)
    termwise = all(abs(float(p - inv_e / math.factorial(c))) < 1e-20
                   for c, p in enumerate(base.probabilities))
    constant_terms = {}
    for k in (8, 1081080):
        dist = fixpoint_distribution(k, 0, bits)
        constant_terms[str(k)] = dist.probabilities[0].agrees_with(prob_power_derangement(k, bits))
    c_max = 400 if quick else 1000
    started = time.perf_counter()
    big = fixpoint_distribution(1081080, c_max, bits)
    elapsed = time.perf_counter() - started
    total = big.total()
    sums_ok = abs(float(total + big.tail_bound) - 1.0) < 1e-12 and float(total) <= 1.0 + 1e-12
    x = exp_rational(Fraction(-1, 64), bits)
    pgf = float(big.pgf(x))
    closed = float(pgf_eval(1081080, x, bits))
    passed = termwise and all(constant_terms.values()) and sums_ok and abs(pgf - 0.418335) < 0.02
    logger.info(f"k=1081080 distribution to {c_max} took {elapsed:.1f}s")
    return CheckResult('fixpoint_distribution', passed,
                       {'termwise_k1': termwise, 'constant_terms': constant_terms, 'c_max': c_max,
                        'total': float(total), 'tail_bound': float(big.tail_bound),
                        'pgf_truncated': pgf, 'pgf_closed_form': closed, 'observed': 0.418335})


def check_monte_carlo_table(quick: bool, workers: int, bits: int) -> CheckResult:
    trials = 500 if quick else 10000
    ks = [k for _, k, _ in OBSERVED_NO_FIX]
    report = experiment_iterated_fixpoints(10000, trials, ks, Fraction(1, 64), seed=1, workers=workers)
    rows = {}
    for label, k, observed in OBSERVED_NO_FIX:
        row = report.row(k)
        tolerance = 0.02 + (5 * row.standard_error if quick else 0.0)
        rows[label] = {'k': k, 'mean': row.mean_miss_probability, 'standard_error': row.standard_error,
                       'observed': observed, 'ok': abs(row.mean_miss_probability - observed) <= tolerance}
    return CheckResult('monte_carlo_table', all(r['ok'] for r in rows.values()),
                       {'n': 10000, 'trials': trials, 'rows': rows})


def check_bard_table(quick: bool, workers: int, bits: int) -> CheckResult:
    table = bard_table(bits)
    got = [row.success_percent for row in table]
    rows_ok = got == list(TABLE1_PERCENT)
    full = bard_success(1, bits).agrees_with(1 - 2 / const_e(bits))
    half = bard_half_success_eta(bits)
    half_ok = abs(float(half) - 0.632) <= 0.002
    unconditional = bard_half_success_eta(bits, conditional=False)
    return CheckResult('bard_table', rows_ok and full and half_ok,
                       {'percent': got, 'printed': list(TABLE1_PERCENT), 'full_codebook_ok': full,
                        'half_success_eta': float(half), 'unconditional_half_success': unconditional})


def check_workloads(quick: bool, workers: int, bits: int) -> CheckResult:
    inv_e = exp_rational(-1, bits)
    pairs = restricted_pair_expectation(2, bits)
    value = pairs.value
    target = inv_e * -105 + Fraction(113, 2)
    report = restricted_workload_expectation(bits)
    return CheckResult('workload_expectations', abs(float(value - target)) < 1e-9,
                       {'pairs_c1_ge_2': float(value), 'target': float(target),
                        'grid_tail_bound': float(pairs.tail_bound),
                        'comparison_target': report.target_label,
                        'readings': {c.label: float(c.value) for c in report.candidates},
                        'matched': report.matched})


def check_keeloq_structure(quick: bool, workers: int, bits: int) -> CheckResult:
    samples = 1000 if quick else 10000
    rng = trial_rng(11, 0)
    blocks = rng.integers(0, 1 << 32, size=samples, dtype=np.uint64)
    keys = (rng.integers(0, 1 << 32, size=samples, dtype=np.uint64) << np.uint64(32)) | \
        rng.integers(0, 1 << 32, size=samples, dtype=np.uint64)
    cipher = mini_encrypt(blocks, keys, KEELOQ)
    roundtrip_full = bool(np.array_equal(mini_decrypt(cipher, keys, KEELOQ), blocks))
    composed_full = bool(np.array_equal(mini_g(mini_f_power(blocks, keys, KEELOQ, 8), keys, KEELOQ), cipher))
    width = 12 if quick else 16
    params = MiniParams.mini(width)
    key = int(rng.integers(0, 1 << 32)) & params.key_mask
    everything = np.arange(1 << width, dtype=np.uint64)
    mini_cipher = mini_encrypt(everything, key, params)
    roundtrip_mini = bool(np.array_equal(mini_decrypt(mini_cipher, key, params), everything))
    composed_mini = bool(np.array_equal(mini_g(mini_f_power(everything, key, params, 8), key, params),
                                        mini_cipher))
    bijective = int(np.unique(mini_f(everything, key, params)).size) == (1 << width)
    detail = {'samples': samples, 'width': width, 'roundtrip_full': roundtrip_full,
              'g_after_f8_full': composed_full, 'roundtrip_exhaustive': roundtrip_mini,
              'g_after_f8_exhaustive': composed_mini, 'f_bijective': bijective}
    passed = all(v for k, v in detail.items() if isinstance(v, bool))
    return CheckResult('keeloq_structure', passed, detail)


def check_attacks(quick: bool, workers: int, bits: int) -> CheckResult:
    params = MiniParams.mini(12)
    key_trials = 40 if quick else 200
    detail = {'width': 12, 'eta': 1.0, 'key_trials': key_trials}
    passed = True
    for attack in ('bard', 'cbw'):
        summary = run_attack_trials(attack, params, 1.0, seed=3, key_trials=key_trials, workers=workers)
        ok = abs(summary.success_rate - summary.predicted) <= 5 * summary.standard_error
        slowest = max(r.wall_time for r in summary.reports)
        detail[attack] = {'success_rate': summary.success_rate, 'predicted': summary.predicted,
                          'standard_error': summary.standard_error, 'ok': ok, 'under_60s': slowest < 60}
        passed = passed and ok and slowest < 60

    two_fixed = find_key(params, lambda k: f_fixed_point_profile(k, params)[0] >= 2, seed=21)
    planted = build_codebook(params, two_fixed, 1.0, seed=0)
    bard_ok = bard_attack(planted).recovered_key == two_fixed
    one_fixed = find_key(params, lambda k: f_fixed_point_profile(k, params)[0] >= 1, seed=22)
    planted = build_codebook(params, one_fixed, 1.0, seed=0)
    cbw_ok = cbw_attack(planted).recovered_key == one_fixed
    detail['planted'] = {'bard': bard_ok, 'cbw': cbw_ok}
    return CheckResult('mini_attacks', passed and bard_ok and cbw_ok, detail)


def check_cost_model(quick: bool, workers: int, bits: int) -> CheckResult:
    n, cost = key_recovery_optimize()
    limit = stage1_limit_log2()
    printed = {'total_log2': 398.412, 'success_log2': -17.98, 'candidate_list_log2': 116.555,
               'speedup_log2': 119.237}
    got = {name: getattr(cost, name) for name in printed}
    close = all(abs(got[name] - value) < 1e-2 for name, value in printed.items())
    stage2_slope_ok = all(
        abs(key_recovery_cost(m).stage2_log2 - (535.6290 - 6.062842 * m)) < 1e-3 for m in (0, 10, 23))
    passed = n == 23 and close and abs(limit - 398.06579) < 1e-3 and stage2_slope_ok
    return CheckResult('cost_model', passed,
                       {'optimal_runs': n, 'values': got, 'printed': printed, 'stage1_limit_log2': limit,
                        'stage2_formula_ok': stage2_slope_ok})


def check_distinguisher(quick: bool, workers: int, bits: int) -> CheckResult:
    rows = {row.label: round(row.accuracy, 4) for row in distinguisher_table()}
    theoretical = {row.label: row.accuracy for row in distinguisher_table(theoretical=True, precision_bits=bits)}
    passed = all(rows[label] == value for label, value in PRINTED_ACCURACY.items())
    return CheckResult('distinguisher_accuracy', passed,
                       {'observed_rows': rows, 'printed': PRINTED_ACCURACY, 'theoretical_rows': theoretical})


CHECKS: List[Callable[[bool, int, int], CheckResult]] = [
    check_convergence,
    check_oracle,
    check_constants,
    check_tau,
    check_expected_fixed_points,
    check_fixpoint_distribution,
    check_monte_carlo_table,
    check_bard_table,
    check_workloads,
    check_keeloq_structure,
    check_attacks,
    check_cost_model,
    check_distinguisher,
]


def run_battery(quick: bool = False, workers: int = 1, precision_bits: int = 256) -> List[CheckResult]:
    """Run every check in order; an exception inside a check marks it failed."""
    results = []
    for check in CHECKS:
        name = check.__name__[len('check_'):]
        logger.info(f"running {name} (quick={quick})")
        started = time.perf_counter()
        try:
            result = check(quick, workers, precision_bits)
        except PermCycleError as e:
            logger.error(f"{name} raised: {e}")
            result = CheckResult(name, False, {'error': str(e)})
        result.wall_time = time.perf_counter() - started
        logger.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'} in {result.wall_time:.1f}s")
        results.append(result)
    return results
