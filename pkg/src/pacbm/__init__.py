"""Interpretable PolSAR classification with polarimetric concept bottlenecks."""

__version__ = "0.1.0"
