"""Verification toolkit for dynamic workflow reconfiguration."""

__version__ = "0.1.0"
