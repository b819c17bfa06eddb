#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for the permcycle command-line interface
"""

import json

import pytest

from cli import build_parser, dispatch
from config import PRECISION_ENV_VAR
from keeloq import MiniParams, f_fixed_point_profile, find_key, mini_encrypt

MINI = MiniParams.mini(12)


def run_json(capsys, argv):
    code = dispatch(argv)
    out = capsys.readouterr().out
    assert code == 0, f"{argv} exited with {code}"
    return json.loads(out)


def test_prob_commands(capsys):
    """Limiting probabilities come back as decimal strings with their precision."""
    doc = run_json(capsys, ['prob', 'derangement', '--bits', '128'])
    assert doc['config']['subcommand'] == 'prob'
    assert doc['config']['precision_bits'] == 128
    assert doc['result']['probability']['decimal'].startswith('0.367879441171')

    doc = run_json(capsys, ['prob', 'no-cycles', '--lengths', '1,2'])
    assert doc['result']['lengths'] == [1, 2]
    assert doc['result']['probability']['decimal'].startswith('0.22313016')

    doc = run_json(capsys, ['prob', 'joint', '--c1', '1', '--c2', '2'])
    assert doc['result']['structured_agrees'] is True

    doc = run_json(capsys, ['prob', 'power-free', '--exponent', '2', '--terms', '1000'])
    assert doc['result']['probability']['decimal'].startswith('0.193025')
    assert abs(doc['result']['partial_sum_estimate'] - 0.193025) < 1e-3


def test_precision_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(PRECISION_ENV_VAR, '96')
    doc = run_json(capsys, ['prob', 'derangement'])
    assert doc['config']['precision_bits'] == 96
    assert doc['result']['probability']['bits'] == 64


def test_egf_and_tau(capsys):
    """Exact coefficients, counts and divisor profiles."""
    doc = run_json(capsys, ['egf', 'coeff', '--all-except', '1', '--order', '6'])
    assert [row['count'] for row in doc['result']['rows']] == [1, 0, 1, 2, 9, 44, 265]

    doc = run_json(capsys, ['egf', 'convergence', '--all-except', '1', '--order', '12'])
    assert len(doc['result']['rows']) == 13

    doc = run_json(capsys, ['tau', '1081080'])
    result = doc['result']
    assert result['tau'] == 256
    assert result['smallest_with_same_tau'] <= 1081080
    assert result['next_prime'] > 1081080
    assert result['k_is_prime'] is False

    doc = run_json(capsys, ['tau', '12', '--list-divisors'])
    assert doc['result']['divisors'] == [1, 2, 3, 4, 6, 12]
    assert doc['result']['expected_fixed_points'] == 6
    assert doc['result']['series_checked'] is True


def test_fixdist_and_simulate(capsys):
    doc = run_json(capsys, ['fixdist', '--k', '6', '--c-max', '10', '--pgf-at', '1/2'])
    assert len(doc['result']['probabilities']) == 11
    assert 'pgf_closed_form' in doc['result']

    doc = run_json(capsys, ['fixdist', '--k', '8', '--cmax', '5', '--bits', '128'])
    assert doc['result']['c_max'] == 5
    assert len(doc['result']['probabilities']) == 6

    doc = run_json(capsys, ['simulate', '--n', '50', '--trials', '20', '--k', '1,2', '--seed', '4'])
    assert [row['k'] for row in doc['result']['rows']] == [1, 2]
    assert set(doc['result']['limit_miss_probability']) == {'1', '2'}


def test_keeloq_round_trip(capsys):
    doc = run_json(capsys, ['keeloq', 'encrypt', '--key', 'abcdef', '--block', '123', '--width', '12'])
    output = doc['result']['output']
    assert int(output, 16) == mini_encrypt(0x123, 0xabcdef, MINI)

    doc = run_json(capsys, ['keeloq', 'decrypt', '--key', 'abcdef', '--block', output, '--width', '12'])
    assert doc['result']['output'] == '123'

    doc = run_json(capsys, ['keeloq', 'encrypt', '--key', '0' * 16, '--block', '0' * 8, '--deployed'])
    assert doc['result']['params']['nlf_taps'] == [1, 6, 12, 23, 31]


def test_codebook_then_attack(capsys, tmp_path):
    """A saved full code-book with a fixed point of f gives the key to the matching attack."""
    key = find_key(MINI, lambda k: f_fixed_point_profile(k, MINI)[0] >= 1, seed=5)
    path = str(tmp_path / 'book.pclb')
    doc = run_json(capsys, ['keeloq', 'codebook', '--key', format(key, '06x'), '--width', '12',
                            '--eta', '1', '--out', path])
    assert doc['result']['entries'] == 4096

    doc = run_json(capsys, ['attack', 'cbw', '--codebook', path])
    assert doc['result']['succeeded'] is True
    assert doc['result']['recovered_key'] == format(key, 'x')


def test_attack_trials(capsys):
    doc = run_json(capsys, ['attack', 'bard', '--width', '12', '--eta', '1', '--key-trials', '3', '--seed', '2'])
    assert doc['result']['trials'] == 3
    assert len(doc['result']['reports']) == 3
    assert 'wall_time' not in doc['result']['reports'][0]


def test_costs_and_table(capsys):
    doc = run_json(capsys, ['costs', '--optimize'])
    assert doc['result']['run_count'] == 23
    assert abs(doc['result']['cost']['speedup_log2'] - 119.237) < 2e-3
    assert doc['result']['distinguisher_speedup_log2'] == 54

    doc = run_json(capsys, ['costs', '--runs', '10', '--timing'])
    assert doc['result']['cost']['run_count'] == 10
    assert 'timing' in doc

    assert dispatch(['bard-table', '--format', 'csv']) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == 'eta,success,success_percent'
    assert len(lines) == 11
    assert lines[-1].endswith(',26.42')

    assert dispatch(['tau', '24', '--format', 'table']) == 0
    assert 'permcycle tau' in capsys.readouterr().out


def test_output_file(capsys, tmp_path):
    target = tmp_path / 'out.json'
    assert dispatch(['tau', '30', '--output', str(target)]) == 0
    assert 'Results saved to' in capsys.readouterr().err
    assert json.loads(target.read_text())['result']['tau'] == 8


def test_errors_and_usage(capsys):
    """Domain errors exit 1, usage errors exit 2."""
    assert dispatch(['tau', '0']) == 1
    assert 'Error:' in capsys.readouterr().err
    assert dispatch(['keeloq', 'encrypt', '--key', 'zz', '--block', '0']) == 1
    assert dispatch(['prob', 'fixed-points', '--c', '1', '--bits', '16']) == 1
    capsys.readouterr()

    assert dispatch(['costs']) == 2
    assert dispatch(['tau', '12', '--format', 'xml']) == 2
    assert dispatch(['nonsense']) == 2
    assert dispatch(['--help']) == 0

    parser = build_parser()
    assert parser.parse_args(['bard-table']).output_format == 'json'
    assert parser.parse_args(['paper-check', '--quick']).quick is True
    assert parser.parse_args(['reproduce']).subcommand == 'reproduce'


@pytest.mark.slow
def test_paper_check_quick(capsys):
    code = dispatch(['paper-check', '--quick'])
    captured = capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out)['result']['passed'] is True
    assert '✅' in captured.err
