'''
Regression data model shared by every estimator: the raw data, the
standardized design the solvers work on, the map back to original units,
and the fit result all methods return.
'''
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Literal, Mapping, Sequence, Tuple

import numpy as np

MethodTag = Literal[
    "ols", "ridge", "ng-aic", "ng-bic", "ngridge-aic", "ngridge-bic",
    "lasso", "enet", "adalasso", "scad", "mcp",
]



# ============ Exceptions ============

class DataError(Exception):
    ''' input data or parameters cannot be used as given '''

class ZeroVarianceColumn(DataError):
    ''' a predictor column is constant and cannot be standardized '''

    def __init__(self, column: int, name: str | None = None) -> None:
        label = f"{column} ({name})" if name else str(column)
        super().__init__(f"column {label} has zero variance")
        self.column = column

class NonFiniteError(DataError):
    ''' the design or response holds NaN or infinite entries '''

class ShapeError(DataError):
    ''' arrays do not have the dimensions the operation needs '''

class InvalidGamma(DataError):
    ''' a SCAD/MCP concavity parameter is outside its admissible range '''

class FoldTooSmall(DataError):
    ''' cross-validation folds cannot be formed from the sample '''

class EmptyGroup(DataError):
    ''' an aggregate was requested over zero metric records '''


class NumericalError(Exception):
    ''' a solver could not produce a valid answer '''

class SingularGram(NumericalError):
    ''' X'X (plus ridge) has a Cholesky pivot below the singularity bound '''

class DegenerateTrace(NumericalError):
    ''' Trace(I - A(lambda)) is not positive, so GCV is undefined '''

class IterationLimit(NumericalError):
    ''' an iterative solver hit its sweep cap before converging '''

    def __init__(self, message: str, iterations: int) -> None:
        super().__init__(message)
        self.iterations = iterations



# ============ Data model ============

def _readonly(values: Any, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if ndim == 2 and arr.ndim == 1:
        arr = arr[:, None]
    if ndim == 1:
        arr = arr.ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    x_raw: np.ndarray                # n x p, original units
    y_raw: np.ndarray                # length n
    names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        x = _readonly(self.x_raw, 2)
        y = _readonly(self.y_raw, 1)
        if x.ndim != 2:
            raise ShapeError(f"design must be a matrix, got shape {x.shape!r}")
        if y.shape[0] != x.shape[0]:
            raise ShapeError(f"response has {y.shape[0]} rows, design has {x.shape[0]}")
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise ShapeError(f"need n >= 2 and p >= 1, got {x.shape!r}")
        names = tuple(self.names) or tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise ShapeError(f"{len(names)} names for {x.shape[1]} columns")
        object.__setattr__(self, "x_raw", x)
        object.__setattr__(self, "y_raw", y)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return int(self.x_raw.shape[0])

    @property
    def p(self) -> int:
        return int(self.x_raw.shape[1])


@dataclass(frozen=True)
class StandardizedDesign:
    '''Columns satisfy sum(x_j) = 0 and sum(x_j**2) = n, except pinned
    columns, which are all zeros; y is centered.'''
    x: np.ndarray
    y: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float
    names: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def p(self) -> int:
        return int(self.x.shape[1])

    @cached_property
    def pinned(self) -> np.ndarray:
        '''Mask of all-zero columns, whose coefficients stay at 0.'''
        mask = ~np.any(self.x, axis=0)
        mask.setflags(write=False)
        return mask

    @cached_property
    def gram(self) -> np.ndarray:
        '''X'X on the standardized scale.'''
        g = self.x.T @ self.x
        g.setflags(write=False)
        return g

    @cached_property
    def xty(self) -> np.ndarray:
        v = self.x.T @ self.y
        v.setflags(write=False)
        return v

    def rows(self, index: Sequence[int] | np.ndarray) -> Dataset:
        '''Sub-sample as a fresh Dataset whose raw units are this design's scale.'''
        idx = np.asarray(index)
        return Dataset(self.x[idx], self.y[idx], self.names)

    def rss(self, beta: np.ndarray) -> float:
        r = self.y - self.x @ beta
        return float(r @ r)


@dataclass(frozen=True)
class CoefficientVector:
    beta: np.ndarray                 # standardized scale, exact zeros off the support
    slopes: np.ndarray               # original scale
    intercept: float                 # original scale

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)

    @property
    def df(self) -> int:
        return int(np.count_nonzero(self.beta))


@dataclass(frozen=True)
class FitResult:
    method: str
    coef: CoefficientVector
    tuning: Mapping[str, float] = field(default_factory=dict)
    iterations: int = 0
    converged: bool = True
    flags: Tuple[str, ...] = ()
    details: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def beta(self) -> np.ndarray:
        return self.coef.beta

    @property
    def support(self) -> np.ndarray:
        return self.coef.support

    def predict(self, x_raw: np.ndarray) -> np.ndarray:
        return np.asarray(x_raw, dtype=float) @ self.coef.slopes + self.coef.intercept

    def to_record(self, names: Sequence[str]) -> Dict[str, Any]:
        '''Plain-JSON view of the fit, coefficients keyed by column name.'''
        slopes = self.coef.slopes
        return {
            "method": self.method,
            "intercept": float(self.coef.intercept),
            "coefficients": {str(name): float(slopes[j]) for j, name in enumerate(names)},
            "support": [str(names[j]) for j in self.support],
            "zeros": [str(names[j]) for j in np.flatnonzero(self.coef.beta == 0.0)],
            "tuning": {k: float(v) for k, v in self.tuning.items()},
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "flags": list(self.flags),
        }



# ============ Operations ============

def standardize(d: Dataset, pin_constant: bool = False) -> StandardizedDesign:
    '''Center every column and scale it to sum of squares n (population
    variance, divisor n); center the response.

    With pin_constant a constant column becomes all zeros with scale 1
    instead of raising ZeroVarianceColumn, so no solver can select it.
    '''
    x, y = d.x_raw, d.y_raw
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteError("design or response contains NaN or infinite values")

    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt(np.mean(centered ** 2, axis=0))
    bound = 1e-12 * np.maximum(1.0, np.abs(x).max(axis=0))
    constant = scales <= bound
    if not pin_constant:
        for j in np.flatnonzero(constant):
            raise ZeroVarianceColumn(int(j), d.names[j])
    centered[:, constant] = 0.0
    scales = np.where(constant, 1.0, scales)

    y_mean = float(y.mean())
    return StandardizedDesign(
        x=_readonly(centered / scales, 2),
        y=_readonly(y - y_mean, 1),
        col_means=_readonly(means, 1),
        col_scales=_readonly(scales, 1),
        y_mean=y_mean,
        names=d.names,
    )


def recover_original_scale(beta: np.ndarray, s: StandardizedDesign) -> CoefficientVector:
    b = np.array(beta, dtype=float).ravel()
    if b.shape[0] != s.p:
        raise ShapeError(f"coefficient vector has length {b.shape[0]}, design has {s.p} columns")
    slopes = b / s.col_scales
    intercept = s.y_mean - float(slopes @ s.col_means)
    return CoefficientVector(beta=_readonly(b, 1), slopes=_readonly(slopes, 1), intercept=intercept)


def make_fit(
    method: str,
    beta: np.ndarray,
    s: StandardizedDesign,
    tuning: Mapping[str, float] | None = None,
    iterations: int = 0,
    converged: bool = True,
    flags: Sequence[str] = (),
    details: Mapping[str, Any] | None = None,
) -> FitResult:
    return FitResult(
        method=method,
        coef=recover_original_scale(beta, s),
        tuning=dict(tuning or {}),
        iterations=int(iterations),
        converged=bool(converged),
        flags=tuple(flags),
        details=dict(details or {}),
    )
