"""Gaussian expansion method solvers for two- and three-body quantum systems."""

__version__ = "0.1.0"
