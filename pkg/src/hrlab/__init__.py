"""Numerical toolkit for Hermite and special Hermite spectral projections."""

__version__ = "0.1.0"
