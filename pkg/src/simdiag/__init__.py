"""Simultaneous diagonalizability hierarchy for sets of real symmetric matrices."""

__all__ = ["__version__"]

__version__ = "0.1.0"
