"""Truncated 2-adic dynamics: T-function verification and maximal-period generators."""

__version__ = "0.1.0"
