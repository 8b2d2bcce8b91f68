"""Symmetry verification and classification toolkit for u_tx = f(t, x, u)."""

__version__ = "0.1.0"
