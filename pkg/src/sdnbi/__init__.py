"""Sandwich-style bi-objective front approximation with mNBI subproblems."""

__version__ = "0.1.0"
