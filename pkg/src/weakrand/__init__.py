"""Oblivious subsequence selection, normality statistics, complexity proxies and exact arithmetic coding."""

__version__ = "0.1.0"
