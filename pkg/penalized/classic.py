'''
Closed-form estimators: OLS, ridge with a GCV-selected penalty, and the
OLS residual variance that feeds the garrote penalty rules.
'''
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from . import config
from .core import (
    DegenerateTrace,
    FitResult,
    SingularGram,
    StandardizedDesign,
    make_fit,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RidgeSelection:
    lambda_grid: np.ndarray          # ascending
    gcv_values: np.ndarray
    lambda_star: float


@dataclass(frozen=True)
class SigmaEstimate:
    sigma2_hat: float
    dof: int


def _solve_normal_equations(s: StandardizedDesign, lam: float) -> np.ndarray:
    '''Solve (X'X + lam I) b = X'y by Cholesky.'''
    if lam < 0.0:
        raise ValueError(f"ridge penalty must be nonnegative, got {lam}")
    n, p = s.n, s.p
    if lam == 0.0 and n <= p:
        raise SingularGram(f"X'X is singular: n={n} <= p={p}")

    a = s.gram + lam * np.eye(p)
    try:
        factor = linalg.cho_factor(a, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularGram(f"Cholesky factorization of X'X failed: {exc}") from exc

    if lam == 0.0:
        pivots = np.diag(factor[0]) ** 2
        j = int(np.argmin(pivots))
        if pivots[j] < config.PIVOT_SCALE * n:
            raise SingularGram(f"X'X pivot {pivots[j]:.3e} at column {j} is below {config.PIVOT_SCALE} * n")
    return linalg.cho_solve(factor, s.xty, check_finite=False)


def fit_ols(s: StandardizedDesign) -> FitResult:
    beta = _solve_normal_equations(s, 0.0)
    return make_fit("ols", beta, s)


def fit_ridge(s: StandardizedDesign, lam: float) -> FitResult:
    beta = _solve_normal_equations(s, float(lam))
    return make_fit("ridge", beta, s, tuning={"lambda": float(lam)})


class RidgeSpectrum:
    '''Thin SVD of the standardized design, computed once and reused for
    every lambda of a GCV sweep.'''

    def __init__(self, s: StandardizedDesign) -> None:
        u, d, vt = linalg.svd(s.x, full_matrices=False, check_finite=False)
        self.n = s.n
        self.p = s.p
        self.d = d
        self.d2 = d ** 2
        self.vt = vt
        self.uty = u.T @ s.y
        self.yy = float(s.y @ s.y)
        tiny = d.max() * max(s.n, s.p) * np.finfo(float).eps if d.size else 0.0
        self.nonzero = d > tiny

    def fitted_fraction(self, lam: float) -> np.ndarray:
        '''d_j^2 / (d_j^2 + lam) per singular direction.'''
        if lam == 0.0:
            return self.nonzero.astype(float)
        return self.d2 / (self.d2 + lam)

    def trace_residual(self, lam: float) -> float:
        '''Trace(I - A(lam)) = n - sum d_j^2 / (d_j^2 + lam).'''
        return self.n - float(np.sum(self.fitted_fraction(lam)))

    def gcv(self, lam: float) -> float:
        lam = float(lam)
        if lam < 0.0:
            raise ValueError(f"ridge penalty must be nonnegative, got {lam}")
        if lam == 0.0 and self.n <= self.p:
            raise DegenerateTrace(f"GCV at lambda=0 needs n > p, got n={self.n}, p={self.p}")
        trace = self.trace_residual(lam)
        if trace <= 0.0:
            raise DegenerateTrace(f"Trace(I - A) = {trace:.3e} at lambda={lam}")

        kept = (1.0 - self.fitted_fraction(lam)) * self.uty
        rss = self.yy - float(self.uty @ self.uty) + float(kept @ kept)
        return max(rss, 0.0) / trace ** 2

    def coefficients(self, lam: float) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(self.nonzero, self.d / (self.d2 + lam), 0.0)
        return self.vt.T @ (factor * self.uty)


def gcv_score(s: StandardizedDesign, lam: float) -> float:
    return RidgeSpectrum(s).gcv(lam)


def default_ridge_grid(s: StandardizedDesign) -> np.ndarray:
    '''100 log-spaced points over [1e-4 n, 1e3 n], with 0 prepended when n > p.'''
    grid = np.logspace(
        np.log10(config.RIDGE_GRID_LOW * s.n),
        np.log10(config.RIDGE_GRID_HIGH * s.n),
        config.RIDGE_GRID_SIZE,
    )
    if s.n > s.p:
        grid = np.concatenate(([0.0], grid))
    return grid


def select_ridge_lambda(s: StandardizedDesign, grid: Sequence[float] | np.ndarray | None = None) -> RidgeSelection:
    lambdas = default_ridge_grid(s) if grid is None else np.asarray(grid, dtype=float).ravel()
    if lambdas.size == 0:
        raise ValueError("ridge lambda grid is empty")
    if np.any(np.diff(lambdas) <= 0.0):
        raise ValueError("ridge lambda grid must be strictly ascending")

    spectrum = RidgeSpectrum(s)
    values = np.array([spectrum.gcv(lam) for lam in lambdas])
    # first occurrence of the minimum, i.e. the smallest lambda on ties
    best = int(np.argmin(values))
    return RidgeSelection(lambda_grid=lambdas, gcv_values=values, lambda_star=float(lambdas[best]))


def fit_ridge_gcv(s: StandardizedDesign, grid: Sequence[float] | np.ndarray | None = None) -> FitResult:
    selection = select_ridge_lambda(s, grid)
    fit = fit_ridge(s, selection.lambda_star)
    logger.debug("ridge: GCV picked lambda=%.4g", selection.lambda_star)
    return make_fit(
        "ridge", fit.beta, s,
        tuning={"lambda": selection.lambda_star},
        details={"selection": selection},
    )


def estimate_sigma2(s: StandardizedDesign, ols: FitResult | None = None) -> SigmaEstimate:
    '''RSS of the OLS fit over n - p - 1; the centered response has
    already used one degree of freedom for the intercept.'''
    if ols is None:
        ols = fit_ols(s)
    dof = s.n - s.p - 1
    if dof < 1:
        raise SingularGram(f"sigma^2 needs n > p + 1, got n={s.n}, p={s.p}")
    return SigmaEstimate(sigma2_hat=s.rss(ols.beta) / dof, dof=dof)
