"""Spectral density laboratory for Turing dynamical systems and random hopping chains."""

__version__ = "0.1.0"
