"""Pseudo-spectral simulation and verification of 1D Euler alignment with fractional dissipation."""

__version__ = "0.1.0"
