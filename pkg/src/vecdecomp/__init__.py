"""Optimal fractional and integer vector-valued clique decompositions."""

__version__ = "0.1.0"
