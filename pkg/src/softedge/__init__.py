"""Soft-edge largest-eigenvalue distributions and their leading finite-size corrections."""

__version__ = "0.1.0"
