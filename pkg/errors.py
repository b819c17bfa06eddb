#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exception hierarchy shared by every permcycle module.
"""


class PermCycleError(Exception):
    """Base class for all permcycle failures."""


class DomainError(PermCycleError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class UnsupportedError(PermCycleError):
    """The request is well formed but has no closed form we implement."""


class ConfigurationError(PermCycleError, ValueError):
    """Invalid cipher parameters, environment values or output options."""


class ConsistencyError(PermCycleError):
    """An internal cross-check disagreed, or stored data is corrupted."""
