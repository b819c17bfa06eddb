#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command-line interface for permcycle
"""

import argparse
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from acceptance import run_battery
from classes import (
    CycleCountSet, CycleLengthSet, class_egf_series, class_egf_structured, convergence_report,
    exactly_t_cycles_series, joint_c1_c2_egf, joint_prob_c1_c2, limit_probability, prob_derangement,
    prob_exactly_c_fixed_points, prob_no_cycles_in, prob_no_powerlength_cycles,
    prob_no_powerlength_cycles_partial,
)
from config import OUTPUT_FORMATS, RunConfig, default_precision_bits, setup_logging
from costmodel import (
    FIGURE_OF_MERIT, FIND_CHARLIE, FP_RANDOM, bard_half_success_eta, bard_success_monte_carlo,
    bard_table, cbw_success, distinguisher_speedup_log2, distinguisher_table, key_recovery_cost,
    key_recovery_optimize, stage1_limit_log2, theoretical_rates,
)
from errors import PermCycleError
from exactnum import (
    HighPrecisionReal, as_rational, divisor_profile, exp_rational, from_rational, smallest_with_tau,
)
from fixpoints import (
    SERIES_CHECK_MAX_K, expected_fixed_points, fixpoint_distribution, iteration_advice, pgf_eval,
    prob_power_derangement,
)
from keeloq import (
    ATTACKS, Block, KeeloqKey, MiniParams, build_codebook, load_codebook, mini_decrypt,
    mini_encrypt, run_attack_trials, save_codebook,
)
from permlab import experiment_iterated_fixpoints


@dataclass
class CommandResult:
    result: Dict[str, Any]
    rows: Optional[List[Dict[str, Any]]] = None
    ok: bool = True


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except PermCycleError as e:
        raise argparse.ArgumentTypeError(str(e))


def _hp_row(value: HighPrecisionReal) -> str:
    return value.to_decimal(30)


# prob

def cmd_prob(args, bits: int) -> CommandResult:
    kind = args.prob_kind
    extra: Dict[str, Any] = {}
    if kind == 'no-cycles':
        value = prob_no_cycles_in(args.lengths, bits)
        extra['lengths'] = sorted(set(args.lengths))
    elif kind == 'derangement':
        value = prob_derangement(bits)
    elif kind == 'fixed-points':
        value = prob_exactly_c_fixed_points(args.c, bits)
    elif kind == 'joint':
        value = joint_prob_c1_c2(args.c1, args.c2, bits)
        structured = joint_c1_c2_egf(args.c1, args.c2)
        extra['structured_egf'] = structured.describe()
        extra['structured_agrees'] = limit_probability(structured, bits).agrees_with(value)
    elif kind == 'power-free':
        value = prob_no_powerlength_cycles(args.exponent, bits)
        if args.terms:
            extra['partial_sum_estimate'] = prob_no_powerlength_cycles_partial(args.exponent, args.terms)
    else:
        value = prob_power_derangement(args.k, bits)
        extra['sigma_over_k'] = str(divisor_profile(args.k).sigma_over_k)
    result = {'kind': kind, 'probability': value.to_json(), **extra}
    return CommandResult(result, [{'kind': kind, 'probability': _hp_row(value)}])


# egf

def _length_set(args) -> CycleLengthSet:
    if args.lengths:
        return CycleLengthSet.finite(args.lengths)
    if args.all_except:
        return CycleLengthSet.all_except(args.all_except)
    if args.divisors_of:
        return CycleLengthSet.divisors_of(args.divisors_of)
    return CycleLengthSet.all()


def cmd_egf(args, bits: int) -> CommandResult:
    if args.egf_kind == 'convergence':
        f = class_egf_structured(CycleLengthSet.all_except(args.all_except), args.extra)
        report = convergence_report(f, args.order, max(bits, 512))
        rows = [{'n': r.n, 'coefficient': str(r.coefficient), 'distance': r.distance.to_decimal(12)}
                for r in report]
        return CommandResult({'egf': f.describe(), 'limit': limit_probability(f, bits).to_json(),
                              'rows': rows}, rows)
    lengths = _length_set(args)
    if args.exactly is not None:
        series = exactly_t_cycles_series(lengths, args.exactly, args.order)
    elif args.counts:
        series = class_egf_series(lengths, CycleCountSet.finite(args.counts), args.order)
    else:
        series = class_egf_series(lengths, CycleCountSet.all(), args.order)
    rows = []
    factorial = 1
    for n, c in enumerate(series.coefficients):
        factorial *= max(n, 1)
        count = c * factorial
        rows.append({'n': n, 'coefficient': str(c),
                     'count': count.numerator if count.denominator == 1 else None,
                     'decimal': from_rational(c, bits).to_decimal(20)})
    return CommandResult({'order': args.order, 'length_kind': lengths.kind.value, 'rows': rows}, rows)


# tau

def cmd_tau(args, bits: int) -> CommandResult:
    profile = divisor_profile(args.k)
    advice = iteration_advice(profile.k)
    expected = expected_fixed_points(profile.k) if profile.k <= SERIES_CHECK_MAX_K else profile.tau
    least = smallest_with_tau(profile.tau)
    result = {
        'k': profile.k,
        'tau': profile.tau,
        'sigma': profile.sigma,
        'sigma_over_k': str(profile.sigma_over_k),
        'expected_fixed_points': expected,
        'series_checked': profile.k <= SERIES_CHECK_MAX_K,
        'smallest_with_same_tau': least,
        'is_smallest_with_tau': least == profile.k,
        'next_prime': advice.prime,
        'next_prime_tau': advice.prime_tau,
        'k_is_prime': advice.prime_is_k,
    }
    if args.list_divisors:
        result['divisors'] = list(profile.divisors)
    return CommandResult(result, [{k: v for k, v in result.items() if k != 'divisors'}])


# fixdist

def cmd_fixdist(args, bits: int) -> CommandResult:
    dist = fixpoint_distribution(args.k, args.c_max, bits)
    rows = [{'c': c, 'probability': _hp_row(p)} for c, p in dist.to_rows()]
    result = {
        'k': dist.k,
        'c_max': dist.c_max,
        'probabilities': [p.to_json() for p in dist.probabilities],
        'total': dist.total().to_json(),
        'tail_bound': dist.tail_bound.to_json(),
        'mean_truncated': dist.mean().to_json(),
    }
    if args.pgf_at is not None:
        x = from_rational(args.pgf_at, bits)
        result['pgf_truncated'] = dist.pgf(x).to_json()
        result['pgf_closed_form'] = pgf_eval(dist.k, x, bits).to_json()
    return CommandResult(result, rows)


# simulate

def cmd_simulate(args, bits: int) -> CommandResult:
    fraction = float(args.fraction)
    report = experiment_iterated_fixpoints(args.n, args.trials, args.k, fraction, args.seed, args.workers)
    rows = report.to_records()
    x = exp_rational(-args.fraction, bits)
    theory = {str(k): float(pgf_eval(k, x, bits)) for k in args.k}
    result = {'n': report.n, 'trials': report.trials, 'fraction': str(args.fraction), 'rows': rows,
              'limit_miss_probability': theory}
    return CommandResult(result, rows)


# keeloq

def _cipher_params(args) -> MiniParams:
    if args.width == 32:
        return MiniParams.deployed() if args.deployed else MiniParams.keeloq()
    return MiniParams.mini(args.width)


def cmd_keeloq(args, bits: int) -> CommandResult:
    params = _cipher_params(args)
    key = KeeloqKey.from_hex(args.key, params.key_bits)
    if args.keeloq_kind == 'codebook':
        codebook = build_codebook(params, key.value, float(args.eta), args.seed)
        save_codebook(args.out, codebook)
        result = {'path': args.out, 'entries': len(codebook), 'eta': codebook.eta, 'params': params.to_dict()}
        return CommandResult(result, [{'path': args.out, 'entries': len(codebook)}])
    block = Block.from_hex(args.block, params.width)
    fn = mini_encrypt if args.keeloq_kind == 'encrypt' else mini_decrypt
    output = Block(fn(block.value, key.value, params), params.width)
    result = {'operation': args.keeloq_kind, 'key': key.to_hex(), 'block': block.to_hex(),
              'output': output.to_hex(), 'params': params.to_dict()}
    return CommandResult(result, [{'operation': args.keeloq_kind, 'block': block.to_hex(),
                                   'output': output.to_hex()}])


# attack

def cmd_attack(args, bits: int) -> CommandResult:
    if args.codebook:
        codebook = load_codebook(args.codebook)
        report = ATTACKS[args.attack_kind](codebook, codebook.params, args.probes)
        result = report.to_dict(args.timing)
        return CommandResult(result, [result])
    params = MiniParams.mini(args.width)
    summary = run_attack_trials(args.attack_kind, params, float(args.eta), args.seed, args.key_trials,
                                args.workers, args.probes)
    result = summary.to_dict(args.timing)
    rows = [{'attack': summary.attack, 'width': params.width, 'eta': summary.eta, 'trials': summary.trials,
             'successes': summary.successes, 'success_rate': summary.success_rate,
             'standard_error': summary.standard_error, 'predicted': summary.predicted}]
    return CommandResult(result, rows)


# costs

def cmd_costs(args, bits: int) -> CommandResult:
    fp, find = theoretical_rates(bits) if args.theoretical else (FP_RANDOM, FIND_CHARLIE)
    if args.optimize:
        n, cost = key_recovery_optimize(args.max_runs, fp, find)
    else:
        n, cost = args.runs, key_recovery_cost(args.runs, fp, find)
    table = distinguisher_table(theoretical=args.theoretical, precision_bits=bits)
    result = {
        'rates': {'fp_random': float(fp), 'find_rate': float(find), 'theoretical': args.theoretical},
        'run_count': n,
        'optimized': args.optimize,
        'cost': cost.to_dict(),
        'stage1_limit_log2': stage1_limit_log2(fp),
        'figure_of_merit': FIGURE_OF_MERIT,
        'distinguisher': [row.to_record() for row in table],
        'distinguisher_speedup_log2': distinguisher_speedup_log2(),
    }
    row = {k: v for k, v in cost.to_dict().items() if k != 'figure_of_merit'}
    return CommandResult(result, [row])


# bard-table

def cmd_bard_table(args, bits: int) -> CommandResult:
    rows = [row.to_record() for row in bard_table(bits)]
    half = bard_half_success_eta(bits)
    result = {
        'rows': rows,
        'half_success_eta': half.to_json(),
        'half_success_eta_unconditional': bard_half_success_eta(bits, conditional=False),
        'cbw_success_full_codebook': cbw_success(1, bits).to_json(),
    }
    if args.monte_carlo:
        result['monte_carlo'] = {
            str(r['eta']): bard_success_monte_carlo(Fraction(r['eta']).limit_denominator(10),
                                                    args.monte_carlo, args.seed).to_dict()
            for r in rows
        }
    return CommandResult(result, rows)


# paper-check

def cmd_paper_check(args, bits: int) -> CommandResult:
    results = run_battery(quick=args.quick, workers=args.workers, precision_bits=bits)
    for r in results:
        print(f"{'✅' if r.passed else '❌'} {r.name}: {'PASS' if r.passed else 'FAIL'}", file=sys.stderr)
    checks = []
    for r in results:
        entry = r.to_dict(args.timing)
        entry['status'] = 'PASS' if r.passed else 'FAIL'
        checks.append(entry)
    passed = all(r.passed for r in results)
    rows = [{'name': r.name, 'status': 'PASS' if r.passed else 'FAIL'} for r in results]
    return CommandResult({'quick': args.quick, 'passed': passed, 'checks': checks}, rows, ok=passed)


HANDLERS: Dict[str, Callable[[Any, int], CommandResult]] = {
    'prob': cmd_prob,
    'egf': cmd_egf,
    'tau': cmd_tau,
    'fixdist': cmd_fixdist,
    'simulate': cmd_simulate,
    'keeloq': cmd_keeloq,
    'attack': cmd_attack,
    'costs': cmd_costs,
    'bard-table': cmd_bard_table,
    'paper-check': cmd_paper_check,
    'reproduce': cmd_paper_check,
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--bits', type=int, default=None,
                        help='Working precision in bits (default: $PERMCYCLE_PRECISION_BITS or 256)')
    common.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    common.add_argument('--format', '-f', choices=OUTPUT_FORMATS, default='json', dest='output_format',
                        help='Output format (default: json)')
    common.add_argument('--output', '-o', help='Write output to this file instead of stdout')
    common.add_argument('--workers', '-w', type=int, default=1,
                        help='Worker processes for simulations and attacks (default: 1)')
    common.add_argument('--timing', action='store_true', help='Include wall-clock timings in the output')
    common.add_argument('--verbose', '-v', action='store_true', help='Verbose logging on stderr')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='permcycle',
        description="permcycle - cycle statistics of random permutations and fixed-point attacks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  permcycle prob no-cycles --lengths 1
  permcycle prob power-free --exponent 2
  permcycle egf coeff --all-except 1 --order 8 --format table
  permcycle tau 1081080
  permcycle fixdist --k 1081080 --cmax 100 --pgf-at 0.984496437005408
  permcycle simulate --n 10000 --trials 10000 --k 1081080 --fraction 0.015625 --seed 1
  permcycle keeloq encrypt --key 0123456789abcdef --block 00000000
  permcycle attack cbw --width 12 --eta 1.0 --seed 3 --key-trials 20
  permcycle costs --optimize
  permcycle bard-table --format csv
  permcycle paper-check --quick
        """
    )
    common = _common_options()
    sub = parser.add_subparsers(dest='subcommand', metavar='COMMAND')
    sub.required = True

    prob = sub.add_parser('prob', help='Limiting probabilities of permutation classes')
    prob_sub = prob.add_subparsers(dest='prob_kind', metavar='KIND')
    prob_sub.required = True
    p = prob_sub.add_parser('no-cycles', parents=[common], help='No cycle with length in a finite set')
    p.add_argument('--lengths', type=_int_list, required=True, help='Comma-separated cycle lengths')
    prob_sub.add_parser('derangement', parents=[common], help='No fixed point')
    p = prob_sub.add_parser('fixed-points', parents=[common], help='Exactly c fixed points')
    p.add_argument('--c', type=int, required=True)
    p = prob_sub.add_parser('joint', parents=[common], help='c1 fixed points and c2 cycles of length 2, 4 or 8')
    p.add_argument('--c1', type=int, required=True)
    p.add_argument('--c2', type=int, required=True)
    p = prob_sub.add_parser('power-free', parents=[common], help='No cycle of square (2) or cube (3) length')
    p.add_argument('--exponent', type=int, choices=(2, 3), required=True)
    p.add_argument('--terms', type=int, default=0, help='Also report a partial-sum estimate with this many terms')
    p = prob_sub.add_parser('power-derangement', parents=[common], help='pi**k has no fixed point')
    p.add_argument('--k', type=int, required=True)

    egf = sub.add_parser('egf', help='Exact EGF coefficients')
    egf_sub = egf.add_subparsers(dest='egf_kind', metavar='KIND')
    egf_sub.required = True
    e = egf_sub.add_parser('coeff', parents=[common], help='Coefficients of the EGF of P(A, B)')
    group = e.add_mutually_exclusive_group()
    group.add_argument('--lengths', type=_int_list, help='Allowed cycle lengths (finite set)')
    group.add_argument('--all-except', type=_int_list, help='Prohibited cycle lengths')
    group.add_argument('--divisors-of', type=int, help='Cycle lengths dividing k')
    counts = e.add_mutually_exclusive_group()
    counts.add_argument('--counts', type=_int_list, help='Allowed cycle counts')
    counts.add_argument('--exactly', type=int, help='Exactly this many cycles')
    e.add_argument('--order', type=int, default=10, help='Truncation order (default: 10)')
    e = egf_sub.add_parser('convergence', parents=[common], help='Distance of coefficients from their limit')
    e.add_argument('--all-except', type=_int_list, required=True, help='Prohibited cycle lengths')
    e.add_argument('--extra', type=int, default=None, help='Multiply by z**c / c!')
    e.add_argument('--order', type=int, default=50)

    t = sub.add_parser('tau', parents=[common], help='Divisor profile of an iteration count')
    t.add_argument('k', type=int)
    t.add_argument('--list-divisors', action='store_true')

    fd = sub.add_parser('fixdist', parents=[common], help='Fixed-point count law of pi**k')
    fd.add_argument('--k', type=int, required=True)
    fd.add_argument('--cmax', '--c-max', dest='c_max', type=int, default=20,
                    help='Largest fixed-point count to report (default: 20)')
    fd.add_argument('--pgf-at', type=_rational, default=None, help='Also evaluate the PGF at this point')

    sim = sub.add_parser('simulate', parents=[common], help='Monte Carlo over random permutations')
    sim.add_argument('--n', type=int, required=True)
    sim.add_argument('--trials', type=int, required=True)
    sim.add_argument('--k', type=_int_list, default=[1], help='Comma-separated iteration counts')
    sim.add_argument('--fraction', type=_rational, default=Fraction(1, 64))

    kq = sub.add_parser('keeloq', help='Keeloq and mini-Keeloq block operations')
    kq_sub = kq.add_subparsers(dest='keeloq_kind', metavar='OP')
    kq_sub.required = True
    for op in ('encrypt', 'decrypt'):
        k = kq_sub.add_parser(op, parents=[common], help=f'{op.capitalize()} one block')
        k.add_argument('--key', required=True, help='Key in hex (bit 0 = k_0)')
        k.add_argument('--block', required=True, help='Block in hex (bit 0 = L_0)')
        k.add_argument('--width', type=int, default=32)
        k.add_argument('--deployed', action='store_true', help='Last NLF tap at L_{i-31}')
    k = kq_sub.add_parser('codebook', parents=[common], help='Write a code-book file')
    k.add_argument('--key', required=True)
    k.add_argument('--width', type=int, default=12)
    k.add_argument('--eta', type=_rational, default=Fraction(1))
    k.add_argument('--out', required=True)
    k.add_argument('--deployed', action='store_true')

    at = sub.add_parser('attack', help='Fixed-point attacks on mini-Keeloq')
    at_sub = at.add_subparsers(dest='attack_kind', metavar='ATTACK')
    at_sub.required = True
    for name in ATTACKS:
        a = at_sub.add_parser(name, parents=[common], help=f'{name} attack')
        a.add_argument('--width', type=int, default=12)
        a.add_argument('--eta', type=_rational, default=Fraction(1))
        a.add_argument('--key-trials', type=int, default=1)
        a.add_argument('--codebook', help='Attack a saved code-book instead of random keys')
        a.add_argument('--probes', type=int, default=8)

    co = sub.add_parser('costs', parents=[common], help='Key-recovery cost model')
    mode = co.add_mutually_exclusive_group(required=True)
    mode.add_argument('--runs', type=int)
    mode.add_argument('--optimize', action='store_true')
    co.add_argument('--max-runs', type=int, default=64)
    co.add_argument('--theoretical', action='store_true', help='Use generating-function rates')

    bt = sub.add_parser('bard-table', parents=[common], help='Two-fixed-point attack success curve')
    bt.add_argument('--monte-carlo', type=int, default=0, help='Also simulate with this many trials')

    pc = sub.add_parser('paper-check', aliases=['reproduce'], parents=[common], help='Run the reproduction battery')
    pc.add_argument('--quick', action='store_true', help='Smaller trial counts')
    return parser


def _json_default(obj):
    if isinstance(obj, HighPrecisionReal):
        return obj.to_json()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def render(config: RunConfig, outcome: CommandResult, timing: Optional[float] = None) -> str:
    """Format one run as JSON, CSV or a rich table."""
    if config.output_format == 'json':
        document: Dict[str, Any] = {'config': config.to_dict(), 'result': outcome.result}
        if timing is not None:
            document['timing'] = {'wall_time': timing}
        return json.dumps(document, sort_keys=True, indent=2, default=_json_default) + '\n'
    rows = outcome.rows if outcome.rows is not None else [outcome.result]
    frame = pd.json_normalize(json.loads(json.dumps(rows, default=_json_default)))
    if config.output_format == 'csv':
        return frame.to_csv(index=False)
    table = Table(title=f"permcycle {config.subcommand}")
    for column in frame.columns:
        table.add_column(str(column))
    for record in frame.itertuples(index=False):
        table.add_row(*['' if v is None else str(v) for v in record])
    buffer = io.StringIO()
    Console(file=buffer, width=160, color_system=None).print(table)
    return buffer.getvalue()


def _parameters(args) -> Dict[str, Any]:
    skip = {'subcommand', 'bits', 'seed', 'output_format', 'output', 'workers', 'timing', 'verbose'}
    params = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        params[key] = str(value) if isinstance(value, Fraction) else value
    return params


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Parse, run and print; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    setup_logging(args.verbose)
    try:
        bits = args.bits if args.bits is not None else default_precision_bits()
        config = RunConfig(subcommand=args.subcommand, precision_bits=bits, seed=args.seed,
                           output_format=args.output_format, workers=args.workers,
                           parameters=_parameters(args))
        handler = HANDLERS[args.subcommand]
        started = time.perf_counter()
        outcome = handler(args, bits)
        elapsed = time.perf_counter() - started
        text = render(config, outcome, elapsed if args.timing else None)
        if args.output:
            with open(args.output, 'w', encoding='utf-8') as f:
                f.write(text)
            print(f"Results saved to: {args.output}", file=sys.stderr)
        else:
            sys.stdout.write(text)
        return 0 if outcome.ok else 1
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 1
    except (PermCycleError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
