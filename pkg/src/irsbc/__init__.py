"""Achievable rate regions of IRS-assisted multi-antenna broadcast channels."""

__version__ = "0.1.0"
