"""Exact analysis of adelic toric metrized divisors over the rationals."""

__version__ = "0.1.0"
