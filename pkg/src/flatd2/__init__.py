"""Flatness checks for two-input nonlinear control systems, difference d <= 2."""

__version__ = "0.1.0"
