"""Geodesics, distances and logarithms on the fixed-rank Bures-Wasserstein stratum."""

__version__ = "0.1.0"
