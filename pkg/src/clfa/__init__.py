"""Exact computations with truncated complete local-filtered rings over F_p."""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import TruncatedFilteredAlgebra, invert, lift_solve, power_ideal, validate
from .core import Element, FilteredSpace, Subgroup, product
from .gf import Fp

__all__ = [
    "__version__",
    "Element",
    "FilteredSpace",
    "Fp",
    "Subgroup",
    "TruncatedFilteredAlgebra",
    "invert",
    "lift_solve",
    "power_ideal",
    "product",
    "validate",
]
