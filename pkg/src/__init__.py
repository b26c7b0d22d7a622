"""Discrete elastic-plastic decomposition toolkit."""

__version__ = "1.0.0"
