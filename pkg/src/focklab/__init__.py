"""Numerical toolkit for Toeplitz and Hankel operators on Fock spaces."""

__version__ = "0.1.0"
