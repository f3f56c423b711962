'''
Pathwise cyclic coordinate descent for the lasso, elastic net, adaptive
lasso, SCAD and MCP.

Objectives are written per observation,

    (1 / (2n)) ||y - X b||^2 + sum_j P(|b_j|),

so a lambda reported here is n times smaller than the same penalty written
against the unscaled residual sum of squares with a factor-2 lambda.
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Literal, Tuple

import numpy as np

from . import config
from .core import FitResult, InvalidGamma, ShapeError, StandardizedDesign, make_fit

logger = logging.getLogger(__name__)

Family = Literal["lasso", "enet", "adalasso", "scad", "mcp"]
FAMILIES: Tuple[str, ...] = ("lasso", "enet", "adalasso", "scad", "mcp")



# ===================== Penalty specification =====================

@dataclass(frozen=True, eq=False)
class PenaltySpec:
    family: Family
    lambda1: float = 0.0
    lambda2: float = 0.0             # enet only
    gamma: float | None = None       # scad / mcp only; None means the default
    weights: np.ndarray | None = None  # adalasso only; np.inf excludes a column
    couple_l2: bool = False          # enet: lambda2 follows lambda1 along a path

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family: {self.family!r}")
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ValueError("penalty levels must be nonnegative")
        if self.family == "scad":
            gamma = config.SCAD_GAMMA if self.gamma is None else float(self.gamma)
            if not gamma > 2.0:
                raise InvalidGamma(f"SCAD needs gamma > 2, got {gamma}")
            object.__setattr__(self, "gamma", gamma)
        elif self.family == "mcp":
            gamma = config.MCP_GAMMA if self.gamma is None else float(self.gamma)
            if not gamma > 1.0:
                raise InvalidGamma(f"MCP needs gamma > 1, got {gamma}")
            object.__setattr__(self, "gamma", gamma)
        if self.family == "adalasso":
            if self.weights is None:
                raise ValueError("adaptive lasso needs a weight vector")
            w = np.array(self.weights, dtype=float).ravel()
            if np.any(np.isnan(w)) or np.any(w <= 0.0):
                raise ValueError("adaptive lasso weights must be positive")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def l2(self) -> float:
        '''Ridge part actually applied (zero outside enet).'''
        return self.lambda2 if self.family == "enet" else 0.0

    @property
    def concavity(self) -> float:
        '''Largest negative curvature of the penalty (0 for convex families).'''
        if self.family == "scad":
            return 1.0 / (self.gamma - 1.0)
        if self.family == "mcp":
            return 1.0 / self.gamma
        return 0.0

    def at(self, lam: float) -> PenaltySpec:
        lam = float(lam)
        if self.couple_l2:
            return replace(self, lambda1=lam, lambda2=lam)
        return replace(self, lambda1=lam)

    def weight_vector(self, p: int) -> np.ndarray:
        if self.family != "adalasso":
            return np.ones(p)
        if self.weights.shape[0] != p:
            raise ShapeError(f"{self.weights.shape[0]} adaptive weights for {p} columns")
        return np.asarray(self.weights)

    def penalty(self, beta: np.ndarray) -> float:
        '''sum_j P(|beta_j|) at this spec's lambda.'''
        t = np.abs(np.asarray(beta, dtype=float))
        lam = self.lambda1
        if self.family == "lasso":
            return float(lam * t.sum())
        if self.family == "enet":
            return float(lam * t.sum() + 0.5 * self.lambda2 * (t @ t))
        if self.family == "adalasso":
            live = t > 0.0
            return float(lam * np.sum(self.weights[live] * t[live]))
        g = self.gamma
        if self.family == "mcp":
            inner = lam * t - t ** 2 / (2.0 * g)
            return float(np.sum(np.where(t <= g * lam, inner, 0.5 * g * lam ** 2)))
        linear = lam * t
        middle = (2.0 * g * lam * t - t ** 2 - lam ** 2) / (2.0 * (g - 1.0))
        flat = 0.5 * lam ** 2 * (g + 1.0)
        return float(np.sum(np.where(t <= lam, linear, np.where(t <= g * lam, middle, flat))))


@dataclass(frozen=True)
class RegularizationPath:
    lambdas: np.ndarray              # strictly descending
    coefs: np.ndarray                # len(lambdas) x p, standardized scale
    dfs: np.ndarray
    iterations: np.ndarray           # sweeps used per lambda
    converged: np.ndarray
    spec: PenaltySpec

    def spec_at(self, k: int) -> PenaltySpec:
        return self.spec.at(self.lambdas[k])

    def fit_at(self, k: int, s: StandardizedDesign, method: str | None = None) -> FitResult:
        spec = self.spec_at(k)
        tuning = {"lambda": float(self.lambdas[k])}
        if spec.family == "enet":
            tuning["lambda2"] = spec.lambda2
        if spec.gamma is not None:
            tuning["gamma"] = float(spec.gamma)
        return make_fit(
            method or spec.family, self.coefs[k], s,
            tuning=tuning,
            iterations=int(self.iterations[k]),
            converged=bool(self.converged[k]),
        )



# ===================== Univariate kernels =====================

def soft_threshold(z: float, t: float) -> float:
    '''sign(z) * max(|z| - t, 0).'''
    if t < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def _segment_objective(t: float, az: float, d: float, spec: PenaltySpec, lam: float) -> float:
    return 0.5 * d * t * t - az * t + replace(spec, lambda1=lam).penalty(np.array([t]))


def _candidate_min(z: float, d: float, spec: PenaltySpec, lam: float) -> float:
    '''Global minimizer by comparing every segment's stationary point and
    the knots; used when the univariate problem is not convex.'''
    az = abs(z)
    g = spec.gamma
    if spec.family == "mcp":
        knots = [0.0, g * lam]
        stationary = []
        if d > 1.0 / g:
            stationary.append(((az - lam) / (d - 1.0 / g), 0.0, g * lam))
    else:
        knots = [0.0, lam, g * lam]
        stationary = [((az - lam) / d, 0.0, lam)]
        curvature = d - 1.0 / (g - 1.0)
        if curvature > 0.0:
            stationary.append(((az - g * lam / (g - 1.0)) / curvature, lam, g * lam))
    candidates = list(knots)
    for t, lo, hi in stationary:
        candidates.append(min(max(t, lo), hi))
    candidates.append(max(az / d, g * lam))

    best_t, best_f = 0.0, _segment_objective(0.0, az, d, spec, lam)
    for t in sorted(candidates):
        f = _segment_objective(t, az, d, spec, lam)
        if f < best_f:
            best_t, best_f = t, f
    return math.copysign(best_t, z) if best_t > 0.0 else 0.0


def _mcp_min(z: float, d: float, lam: float, g: float, spec: PenaltySpec) -> float:
    if d <= 1.0 / g:
        return _candidate_min(z, d, spec, lam)
    if abs(z) > g * lam * d:
        return z / d
    return soft_threshold(z, lam) / (d - 1.0 / g)


def _scad_min(z: float, d: float, lam: float, g: float, spec: PenaltySpec) -> float:
    curvature = d - 1.0 / (g - 1.0)
    if curvature <= 0.0:
        return _candidate_min(z, d, spec, lam)
    az = abs(z)
    if az <= lam * (d + 1.0):
        return soft_threshold(z, lam) / d
    if az <= g * lam * d:
        return soft_threshold(z, g * lam / (g - 1.0)) / curvature
    return z / d


def univariate_penalized_min(z: float, d: float, spec: PenaltySpec, weight: float = 1.0) -> float:
    '''Global minimizer over b of (d/2) (b - z/d)^2 + P(|b|).'''
    if not d > 0.0:
        raise ValueError(f"curvature d must be positive, got {d}")
    lam = spec.lambda1 * weight
    family = spec.family
    if family in ("lasso", "adalasso"):
        return soft_threshold(z, lam) / d
    if family == "enet":
        return soft_threshold(z, lam) / (d + spec.lambda2)
    if family == "mcp":
        return _mcp_min(z, d, lam, spec.gamma, spec)
    return _scad_min(z, d, lam, spec.gamma, spec)



# ===================== Path fitting =====================

def lambda_max(s: StandardizedDesign, spec: PenaltySpec) -> float:
    '''Smallest lambda whose solution is exactly zero.'''
    corr = np.abs(s.xty) / s.n
    if spec.family == "adalasso":
        w = spec.weight_vector(s.p)
        finite = np.isfinite(w)
        if not finite.any():
            return 0.0
        return float(np.max(corr[finite] / w[finite]))
    return float(corr.max())


def path_lambdas(
    s: StandardizedDesign,
    spec: PenaltySpec,
    grid_size: int = config.DEFAULT_PATH_SIZE,
    ratio: float | None = None,
) -> np.ndarray:
    '''Log-spaced grid from lambda_max down to ratio * lambda_max.'''
    if grid_size < 2:
        raise ValueError(f"path needs at least 2 lambdas, got {grid_size}")
    if ratio is None:
        ratio = config.PATH_RATIO if s.n > s.p else config.PATH_RATIO_WIDE
    top = lambda_max(s, spec)
    if top <= 0.0:
        logger.debug("lambda_max is 0 (response orthogonal to every column); using %.1e", config.LAMBDA_FLOOR)
        top = config.LAMBDA_FLOOR
    return top * np.logspace(0.0, np.log10(ratio), grid_size)


class _CoordinateDescent:
    '''Covariance-update coordinate descent on G = X'X/n, c = X'y/n, with an
    active set: cycle the current support to convergence, then check every
    zero coordinate against its threshold and re-enter if any moved.'''

    def __init__(
        self,
        s: StandardizedDesign,
        spec: PenaltySpec,
        tol: float,
        max_sweeps: int,
        check_descent: bool,
    ) -> None:
        self.g = s.gram / s.n
        self.c = s.xty / s.n
        self.yy = float(s.y @ s.y) / s.n
        self.d = np.diag(self.g).copy()
        self.w = spec.weight_vector(s.p)
        self.excluded = ~np.isfinite(self.w) | s.pinned
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.check_descent = check_descent

    def objective(self, beta: np.ndarray, spec: PenaltySpec) -> float:
        loss = 0.5 * (self.yy - 2.0 * (self.c @ beta) + beta @ self.g @ beta)
        return loss + spec.penalty(beta)

    def _sweep(self, active: np.ndarray, beta: np.ndarray, q: np.ndarray, spec: PenaltySpec) -> float:
        max_change = 0.0
        for j in active:
            old = beta[j]
            new = univariate_penalized_min(q[j] + self.d[j] * old, self.d[j], spec, self.w[j])
            if new != old:
                delta = new - old
                q -= self.g[j] * delta
                beta[j] = new
                max_change = max(max_change, abs(delta))
        return max_change

    def solve(self, spec: PenaltySpec, start: np.ndarray) -> tuple[np.ndarray, int, bool]:
        '''Returns (beta, active-set sweeps used, converged). Converged means
        the last sweep moved no coordinate by tol and no zero coordinate
        violates its threshold.'''
        beta = start.copy()
        beta[self.excluded] = 0.0
        threshold = spec.lambda1 * self.w * (1.0 + 1e-10)
        active = np.flatnonzero(beta)
        q = self.c - self.g @ beta
        previous = self.objective(beta, spec) if self.check_descent else 0.0
        sweeps = 0
        settled = True

        while True:
            if active.size:
                settled = False
                while sweeps < self.max_sweeps:
                    sweeps += 1
                    change = self._sweep(active, beta, q, spec)
                    if self.check_descent:
                        current = self.objective(beta, spec)
                        assert current <= previous + 1e-12 * max(1.0, abs(previous)), "objective increased"
                        previous = current
                    if change < self.tol:
                        settled = True
                        break

            # one full pass: a zero coordinate moves iff |z_j| exceeds its threshold
            q = self.c - self.g @ beta
            candidates = (beta == 0.0) & ~self.excluded & (np.abs(q) > threshold)
            if not candidates.any():
                return beta, sweeps, settled
            if sweeps >= self.max_sweeps:
                return beta, sweeps, False
            active = np.union1d(active, np.flatnonzero(candidates))


def fit_path(
    s: StandardizedDesign,
    spec: PenaltySpec,
    grid_size: int = config.DEFAULT_PATH_SIZE,
    lambdas: np.ndarray | None = None,
    ratio: float | None = None,
    tol: float = config.CD_TOL,
    max_sweeps: int = config.CD_MAX_SWEEPS,
    check_descent: bool = False,
) -> RegularizationPath:
    if lambdas is None:
        lambdas = path_lambdas(s, spec, grid_size, ratio)
    else:
        lambdas = np.asarray(lambdas, dtype=float).ravel()
        if lambdas.size == 0 or np.any(lambdas <= 0.0) or np.any(np.diff(lambdas) >= 0.0):
            raise ValueError("path lambdas must be positive and strictly descending")

    solver = _CoordinateDescent(s, spec, tol, max_sweeps, check_descent)
    coefs = np.zeros((lambdas.size, s.p))
    iterations = np.zeros(lambdas.size, dtype=int)
    converged = np.ones(lambdas.size, dtype=bool)

    beta = np.zeros(s.p)
    for k, lam in enumerate(lambdas):
        beta, sweeps, ok = solver.solve(spec.at(lam), beta)
        coefs[k] = beta
        iterations[k] = sweeps
        converged[k] = ok
        if not ok:
            logger.warning("%s path: no convergence at lambda=%.4g after %d sweeps", spec.family, lam, sweeps)

    return RegularizationPath(
        lambdas=lambdas,
        coefs=coefs,
        dfs=np.count_nonzero(coefs, axis=1),
        iterations=iterations,
        converged=converged,
        spec=spec,
    )



# ===================== Adaptive lasso =====================

def adaptive_weights(beta: np.ndarray) -> np.ndarray:
    '''1 / |beta_j|, infinite where beta_j = 0 (column excluded).'''
    b = np.abs(np.asarray(beta, dtype=float))
    w = np.full(b.shape, np.inf)
    w[b > 0.0] = 1.0 / b[b > 0.0]
    return w


def fit_adaptive_lasso(
    s: StandardizedDesign,
    folds: int = config.DEFAULT_FOLDS,
    seed: int = config.DEFAULT_SEED,
    fold_weights: bool = False,
    grid_size: int = config.DEFAULT_PATH_SIZE,
) -> FitResult:
    '''Lasso tuned by CV, then a weighted lasso with w_j = 1/|b_j| tuned by
    CV. With fold_weights the first stage is refit inside every CV fold.'''
    from .tuning import cv_select      # tuning builds on fit_path

    first = cv_select(s, PenaltySpec("lasso"), folds, seed, grid_size)
    if first.coef.df == 0:
        logger.warning("adaptive lasso: first-stage lasso is all zero; returning the zero fit")
        return make_fit(
            "adalasso", np.zeros(s.p), s,
            tuning={"lambda_first": first.tuning["lambda"]},
            iterations=first.iterations,
            converged=first.converged,
            flags=("all_zero_first_stage",),
        )

    weights = adaptive_weights(first.beta)
    spec_for_fold = None
    if fold_weights:
        def spec_for_fold(train: StandardizedDesign) -> PenaltySpec:
            inner = cv_select(train, PenaltySpec("lasso"), folds, seed, grid_size)
            return PenaltySpec("adalasso", weights=adaptive_weights(inner.beta))

    second = cv_select(
        s, PenaltySpec("adalasso", weights=weights), folds, seed, grid_size,
        spec_for_fold=spec_for_fold,
    )
    return make_fit(
        "adalasso", second.beta, s,
        tuning={"lambda": second.tuning["lambda"], "lambda_first": first.tuning["lambda"]},
        iterations=second.iterations,
        converged=second.converged,
        details={"weights": weights, "cv": second.details.get("cv"), "first_stage": first},
    )
