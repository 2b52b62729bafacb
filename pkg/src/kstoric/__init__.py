"""Exact K-stability invariants of polarized toric pairs."""

__version__ = "0.1.0"
