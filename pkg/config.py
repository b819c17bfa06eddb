#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Run configuration and logging setup for permcycle
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict

from errors import ConfigurationError

PRECISION_ENV_VAR = 'PERMCYCLE_PRECISION_BITS'
DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64
OUTPUT_FORMATS = ('json', 'csv', 'table')
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def default_precision_bits() -> int:
    """Precision default: the environment variable if set, else 256 bits."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None or raw.strip() == '':
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise ConfigurationError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}")
    if bits < MIN_PRECISION_BITS:
        raise ConfigurationError(f"{PRECISION_ENV_VAR} must be at least {MIN_PRECISION_BITS}, got {bits}")
    return bits


def setup_logging(verbose: bool = False) -> None:
    """Configure root logging; INFO when verbose, WARNING otherwise."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format=LOG_FORMAT,
        force=True,
    )


@dataclass
class RunConfig:
    """Fully resolved configuration of one CLI run."""
    subcommand: str
    precision_bits: int = DEFAULT_PRECISION_BITS
    seed: int = 0
    output_format: str = 'json'
    workers: int = 1
    parameters: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(f"Unknown output format: {self.output_format}")
        if self.precision_bits < MIN_PRECISION_BITS:
            raise ConfigurationError(f"precision must be at least {MIN_PRECISION_BITS} bits")
        if self.workers < 1:
            raise ConfigurationError("workers must be positive")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'subcommand': self.subcommand,
            'precision_bits': self.precision_bits,
            'seed': self.seed,
            'output_format': self.output_format,
            'workers': self.workers,
            'parameters': dict(sorted(self.parameters.items())),
        }
