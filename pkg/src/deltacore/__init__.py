"""Exact differential-algebra and formula-rewriting toolkit with a sampling oracle."""

__version__ = "0.1.0"
