#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
JSON HTTP interface to the permcycle calculators
"""

import os

from flask import Flask, jsonify, request
from flask_cors import CORS

from classes import (
    joint_prob_c1_c2, prob_derangement, prob_exactly_c_fixed_points, prob_no_cycles_in,
    prob_no_powerlength_cycles,
)
from config import default_precision_bits
from costmodel import (
    FIGURE_OF_MERIT, FIND_CHARLIE, FP_RANDOM, bard_half_success_eta, bard_table, key_recovery_cost,
    key_recovery_optimize, theoretical_rates,
)
from errors import ConfigurationError, DomainError, UnsupportedError
from exactnum import as_rational, divisor_profile
from fixpoints import fixpoint_distribution, iteration_advice, prob_power_derangement
from keeloq import Block, KeeloqKey, MiniParams, mini_decrypt, mini_encrypt
from permlab import experiment_iterated_fixpoints

app = Flask(__name__)
CORS(app)

MAX_SIMULATION_CELLS = 10 ** 7
MAX_FIXDIST_ORDER = 2000

CLIENT_ERRORS = (DomainError, ConfigurationError, UnsupportedError, ValueError, TypeError)


def _payload():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise DomainError('A JSON object body is required')
    return data


def _require(data, name):
    if data.get(name) is None:
        raise DomainError(f'{name} is required')
    return data[name]


def _bits(data):
    bits = data.get('bits')
    return default_precision_bits() if bits is None else int(bits)


@app.route('/tau/<int:k>', methods=['GET'])
def tau(k):
    """Divisor profile and iteration advice for k."""
    try:
        profile = divisor_profile(k)
        advice = iteration_advice(profile.k)
        return jsonify({
            'success': True,
            'k': profile.k,
            'tau': profile.tau,
            'sigma': profile.sigma,
            'sigma_over_k': str(profile.sigma_over_k),
            'next_prime': advice.prime,
            'next_prime_tau': advice.prime_tau,
        })
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/prob', methods=['POST'])
def prob():
    """Limiting probability of one permutation class."""
    try:
        data = _payload()
        kind = _require(data, 'kind')
        bits = _bits(data)
        if kind == 'no-cycles':
            value = prob_no_cycles_in(_require(data, 'lengths'), bits)
        elif kind == 'derangement':
            value = prob_derangement(bits)
        elif kind == 'fixed-points':
            value = prob_exactly_c_fixed_points(int(_require(data, 'c')), bits)
        elif kind == 'joint':
            value = joint_prob_c1_c2(int(_require(data, 'c1')), int(_require(data, 'c2')), bits)
        elif kind == 'power-free':
            value = prob_no_powerlength_cycles(int(_require(data, 'exponent')), bits)
        elif kind == 'power-derangement':
            value = prob_power_derangement(int(_require(data, 'k')), bits)
        else:
            return jsonify({'success': False, 'error': f'Unknown kind: {kind}'}), 400
        return jsonify({'success': True, 'kind': kind, 'probability': value.to_json()})
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/fixdist', methods=['POST'])
def fixdist():
    """Fixed-point count law of pi**k up to c_max."""
    try:
        data = _payload()
        k = int(_require(data, 'k'))
        c_max = int(data.get('c_max', 20))
        if c_max > MAX_FIXDIST_ORDER:
            return jsonify({'success': False, 'error': f'c_max is limited to {MAX_FIXDIST_ORDER}'}), 400
        dist = fixpoint_distribution(k, c_max, _bits(data))
        return jsonify({
            'success': True,
            'k': dist.k,
            'c_max': dist.c_max,
            'probabilities': [p.to_json() for p in dist.probabilities],
            'tail_bound': dist.tail_bound.to_json(),
        })
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/bard-table', methods=['GET'])
def get_bard_table():
    """Success of the two-fixed-point attack for eta = 10%..100%."""
    try:
        bits = request.args.get('bits', type=int) or default_precision_bits()
        return jsonify({
            'success': True,
            'rows': [row.to_record() for row in bard_table(bits)],
            'half_success_eta': bard_half_success_eta(bits).to_json(),
        })
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/costs', methods=['POST'])
def costs():
    """Key-recovery cost for a run count, or the optimal run count."""
    try:
        data = request.get_json(silent=True) or {}
        if data.get('theoretical'):
            fp, find = theoretical_rates(_bits(data))
        else:
            fp, find = FP_RANDOM, FIND_CHARLIE
        if data.get('optimize') or data.get('runs') is None:
            n, cost = key_recovery_optimize(int(data.get('max_runs', 64)), fp, find)
        else:
            n = int(data['runs'])
            cost = key_recovery_cost(n, fp, find)
        return jsonify({'success': True, 'run_count': n, 'cost': cost.to_dict(),
                        'figure_of_merit': FIGURE_OF_MERIT})
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/keeloq', methods=['POST'])
def keeloq_block():
    """Encrypt or decrypt one block."""
    try:
        data = _payload()
        operation = data.get('operation', 'encrypt')
        if operation not in ('encrypt', 'decrypt'):
            return jsonify({'success': False, 'error': f'Unknown operation: {operation}'}), 400
        width = int(data.get('width', 32))
        if width == 32:
            params = MiniParams.deployed() if data.get('deployed') else MiniParams.keeloq()
        else:
            params = MiniParams.mini(width)
        key = KeeloqKey.from_hex(str(_require(data, 'key')), params.key_bits)
        block = Block.from_hex(str(_require(data, 'block')), params.width)
        fn = mini_encrypt if operation == 'encrypt' else mini_decrypt
        output = Block(fn(block.value, key.value, params), params.width)
        return jsonify({'success': True, 'operation': operation, 'output': output.to_hex(),
                        'params': params.to_dict()})
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/simulate', methods=['POST'])
def simulate():
    """Iterated fixed-point Monte Carlo, bounded to n * trials <= 10**7."""
    try:
        data = _payload()
        n = int(_require(data, 'n'))
        trials = int(_require(data, 'trials'))
        if n * trials > MAX_SIMULATION_CELLS:
            return jsonify({'success': False,
                            'error': f'n * trials must not exceed {MAX_SIMULATION_CELLS}'}), 400
        ks = data.get('k', [1])
        ks = [int(k) for k in (ks if isinstance(ks, list) else [ks])]
        fraction = as_rational(str(data.get('fraction', '1/64')))
        report = experiment_iterated_fixpoints(n, trials, ks, float(fraction), int(data.get('seed', 0)))
        return jsonify({'success': True, 'n': report.n, 'trials': report.trials,
                        'fraction': str(fraction), 'rows': report.to_records()})
    except CLIENT_ERRORS as e:
        return jsonify({'success': False, 'error': str(e)}), 400
    except Exception as e:
        return jsonify({'success': False, 'error': str(e)}), 500


@app.route('/health')
def health():
    """Health check endpoint."""
    return jsonify({'success': True, 'status': 'healthy'})


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 8080))
    app.run(host='0.0.0.0', port=port, debug=False)
