"""Numerical toolkit for harmonic analysis on spaces of homogeneous type."""

__version__ = "0.1.0"
