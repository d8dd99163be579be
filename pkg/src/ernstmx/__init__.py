"""Goursat problem for the Ernst-Maxwell equations via a 3x3 Riemann-Hilbert problem."""

__version__ = "0.1.0"
