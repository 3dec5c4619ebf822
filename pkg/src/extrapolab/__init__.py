"""Numerical laboratory for multilinear weighted extrapolation on dyadic models."""

__version__ = "0.1.0"
