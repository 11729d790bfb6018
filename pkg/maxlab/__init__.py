"""Exact and numerical evaluation of one-dimensional maximal operators."""

__version__ = "0.1.0"
