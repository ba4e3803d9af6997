"""Exact computations for the restricted quantum affine sl2 at roots of unity."""

__version__ = "0.1.0"
