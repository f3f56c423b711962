'''
Nonnegative garrote: shrink an initial estimate (OLS or ridge) coordinate by
coordinate with factors u >= 0 solving

    min_{u >= 0}  ||y - Z u||^2 + 2 lam sum_j w_j u_j,     Z = X diag(init)

The quadratic program is solved by cyclic coordinate minimization with
nonnegativity clamping, working on Z'Z and Z'y.
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import config
from .classic import (
    RidgeSpectrum,
    estimate_sigma2,
    fit_ols,
    fit_ridge,
    select_ridge_lambda,
)
from .core import FitResult, IterationLimit, ShapeError, StandardizedDesign, make_fit

logger = logging.getLogger(__name__)

Criterion = Literal["aic", "cp", "bic"]


@dataclass(frozen=True)
class GarroteProblem:
    z: np.ndarray                    # n x p, column j = x_j * init_j
    y: np.ndarray
    weights: np.ndarray              # ones for the OLS garrote
    lam: float
    init: np.ndarray | None = None   # initial estimate behind z, for beta = u * init

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if z.ndim != 2 or z.shape[0] != y.shape[0] or z.shape[1] != w.shape[0]:
            raise ShapeError(f"garrote problem shapes disagree: z {z.shape!r}, y {y.shape!r}, w {w.shape!r}")
        if np.any(w < 0.0):
            raise ValueError("garrote weights must be nonnegative")
        if not self.lam > 0.0:
            raise ValueError(f"garrote lambda must be positive, got {self.lam}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", w)
        if self.init is not None:
            init = np.asarray(self.init, dtype=float).ravel()
            if init.shape != w.shape:
                raise ShapeError(f"initial estimate has length {init.shape[0]}, expected {w.shape[0]}")
            object.__setattr__(self, "init", init)

    @property
    def n(self) -> int:
        return int(self.z.shape[0])

    def objective(self, u: np.ndarray) -> float:
        r = self.y - self.z @ u
        return float(r @ r + 2.0 * self.lam * (self.weights @ u))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        '''Derivative of the objective with respect to u.'''
        return -2.0 * (self.z.T @ (self.y - self.z @ u)) + 2.0 * self.lam * self.weights


@dataclass(frozen=True)
class GarroteSolution:
    u: np.ndarray
    beta: np.ndarray                 # u_j * init_j (u itself when no init is given)
    kkt_residual: float
    iterations: int


def kkt_residual(grad: np.ndarray, u: np.ndarray) -> float:
    '''Largest violation of: grad_j >= 0 where u_j = 0, grad_j = 0 where u_j > 0.'''
    if u.size == 0:
        return 0.0
    violation = np.where(u > 0.0, np.abs(grad), np.maximum(0.0, -grad))
    return float(violation.max())


def solve_nn_qp(
    prob: GarroteProblem,
    max_sweeps: int = config.QP_MAX_SWEEPS,
    tol: float = config.QP_TOL,
) -> GarroteSolution:
    g = prob.z.T @ prob.z
    c = prob.z.T @ prob.y
    diag = np.diag(g).copy()
    pen = prob.lam * prob.weights
    kkt_tol = config.QP_KKT_SCALE * prob.n

    # a zero column (initial estimate exactly 0) keeps u_j = 0
    live = np.flatnonzero(diag > 0.0)
    u = np.zeros(prob.z.shape[1])
    u[live] = 1.0
    q = c - g @ u                    # running Z'(y - Z u)

    for sweep in range(1, max_sweeps + 1):
        max_change = 0.0
        for j in live:
            old = u[j]
            new = max(0.0, (q[j] + diag[j] * old - pen[j]) / diag[j])
            if new != old:
                delta = new - old
                q -= g[:, j] * delta
                u[j] = new
                max_change = max(max_change, abs(delta))

        if max_change < tol:
            q = c - g @ u
            residual = kkt_residual(-2.0 * q + 2.0 * pen, u)
            if residual <= kkt_tol:
                beta = u * prob.init if prob.init is not None else u.copy()
                beta[u == 0.0] = 0.0
                return GarroteSolution(u=u, beta=beta, kkt_residual=residual, iterations=sweep)

    raise IterationLimit(
        f"garrote QP did not meet its KKT tolerance after {max_sweeps} sweeps", max_sweeps
    )


def garrote_lambda(sigma2: float, n: int, criterion: Criterion) -> float:
    '''sigma^2 for Cp/AIC, sigma^2 log(n) / 2 for BIC, floored away from 0.'''
    if criterion in ("aic", "cp"):
        lam = sigma2
    elif criterion == "bic":
        lam = sigma2 * math.log(n) / 2.0
    else:
        raise ValueError(f"unknown garrote criterion: {criterion!r}")
    return max(lam, config.GARROTE_LAMBDA_FLOOR)


def _criterion_tag(prefix: str, criterion: Criterion) -> str:
    return f"{prefix}-{'bic' if criterion == 'bic' else 'aic'}"


def _shrink(
    tag: str,
    s: StandardizedDesign,
    init: np.ndarray,
    weights: np.ndarray,
    lam: float,
    tuning: dict[str, float],
) -> FitResult:
    prob = GarroteProblem(z=s.x * init, y=s.y, weights=weights, lam=lam, init=init)
    sol = solve_nn_qp(prob)
    logger.debug("%s: lambda=%.4g, %d sweeps, KKT residual %.2e", tag, lam, sol.iterations, sol.kkt_residual)
    return make_fit(
        tag, sol.beta, s,
        tuning={**tuning, "lambda": lam},
        iterations=sol.iterations,
        details={"u": sol.u, "kkt_residual": sol.kkt_residual},
    )


def fit_garrote(s: StandardizedDesign, criterion: Criterion = "bic") -> FitResult:
    ols = fit_ols(s)
    sigma = estimate_sigma2(s, ols)
    lam = garrote_lambda(sigma.sigma2_hat, s.n, criterion)
    return _shrink(
        _criterion_tag("ng", criterion), s, ols.beta.copy(), np.ones(s.p), lam,
        {"sigma2": sigma.sigma2_hat},
    )


def ridge_garrote_weights(s: StandardizedDesign, lambda_r: float, spectrum: RidgeSpectrum | None = None) -> np.ndarray:
    '''Diagonal of (X'X + lambda_r I)^-1 X'X.'''
    if lambda_r == 0.0:
        return np.ones(s.p)
    spectrum = spectrum or RidgeSpectrum(s)
    return (spectrum.vt.T ** 2) @ spectrum.fitted_fraction(lambda_r)


def fit_ridge_garrote(
    s: StandardizedDesign,
    criterion: Criterion = "bic",
    lambda_r: float | None = None,
) -> FitResult:
    if lambda_r is None:
        lambda_r = select_ridge_lambda(s).lambda_star
    lambda_r = float(lambda_r)

    if lambda_r == 0.0:
        init = fit_ols(s).beta.copy()
    else:
        init = fit_ridge(s, lambda_r).beta.copy()
    weights = ridge_garrote_weights(s, lambda_r)

    sigma = estimate_sigma2(s)
    lam = garrote_lambda(sigma.sigma2_hat, s.n, criterion)
    return _shrink(
        _criterion_tag("ngridge", criterion), s, init, weights, lam,
        {"sigma2": sigma.sigma2_hat, "lambda_r": lambda_r},
    )
