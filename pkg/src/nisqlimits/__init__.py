"""Exact small-scale checks of information and entanglement limits of noisy circuits."""

__version__ = "0.1.0"
