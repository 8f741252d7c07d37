"""Finite free probability in exact and multiprecision arithmetic."""

from .poly_core import BigReal, MonicPoly, Poly

__version__ = "0.1.0"

__all__ = ["BigReal", "MonicPoly", "Poly", "__version__"]
