'''
Penalized least-squares estimators (OLS, ridge, nonnegative garrote, lasso,
elastic net, adaptive lasso, SCAD, MCP), their tuning rules, and the
simulation and scoring pieces of the benchmark.
'''
from __future__ import annotations

from .core import (
    DataError,
    Dataset,
    FitResult,
    NumericalError,
    StandardizedDesign,
    standardize,
)
from .methods import MethodOptions, fit_method

__all__ = [
    "DataError",
    "Dataset",
    "FitResult",
    "MethodOptions",
    "NumericalError",
    "StandardizedDesign",
    "fit_method",
    "standardize",
]
