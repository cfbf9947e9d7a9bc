"""Exact Rauzy-Veech induction, cocycle diagnostics and limit shapes
for interval exchange maps."""

__version__ = "0.1.0"
