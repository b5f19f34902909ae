"""Numerics for the degenerate evolution equation (d/dt)(Ax) = -x + G(x)."""

__version__ = "0.1.0"
