"""Exact computations in groups of coloured tree automorphisms with prescribed local actions."""

__version__ = "0.1.0"
