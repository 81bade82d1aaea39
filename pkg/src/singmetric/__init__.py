"""Computable pseudometric on singularity types in three finite models."""
from . import dim1, grid, toric  # noqa: F401  (register the engines)
from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .report import Report

__version__ = "0.1.0"
__all__ = list(_core_all) + ["Report", "dim1", "grid", "toric"]
