'''
Tuning-parameter selection for the path families: k-fold cross-validation
over a fixed lambda grid, BIC scoring, and the convexity diagnostic that
picks gamma for SCAD and MCP.
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Literal, Sequence, Tuple

import numpy as np
from scipy import linalg

from . import config
from .core import FitResult, FoldTooSmall, StandardizedDesign, make_fit, standardize
from .shrinkage import PenaltySpec, RegularizationPath, fit_path, path_lambdas

logger = logging.getLogger(__name__)

SpecForFold = Callable[[StandardizedDesign], PenaltySpec]


@dataclass(frozen=True)
class CvResult:
    lambdas: np.ndarray              # descending
    cv_mean: np.ndarray
    cv_se: np.ndarray
    lambda_min: float
    index_min: int
    fold_ids: np.ndarray             # fold index of every row


@dataclass(frozen=True)
class GammaSelection:
    gamma_ladder: Tuple[float, ...]
    bic_values: np.ndarray           # BIC at each gamma's BIC-optimal lambda
    convexity_flags: np.ndarray      # per gamma: diagnostic passes at that lambda
    lambda_flags: Tuple[np.ndarray, ...]  # per gamma: the per-lambda diagnostic
    bic_index: np.ndarray            # per gamma: index of the BIC-optimal lambda
    gamma_star: float
    fallback: bool                   # no rung passed; largest gamma taken
    cv: CvResult | None = None



# ===================== Cross-validation =====================

def fold_assignment(n: int, folds: int, seed: int) -> np.ndarray:
    '''Seeded random permutation split into folds as evenly as possible.'''
    if folds < 2 or folds > n:
        raise FoldTooSmall(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    ids = np.empty(n, dtype=int)
    for k, part in enumerate(np.array_split(perm, folds)):
        ids[part] = k
    smallest_train = n - int(np.bincount(ids).max())
    if smallest_train < 2:
        raise FoldTooSmall(f"a training split would hold {smallest_train} rows")
    return ids


def _fold_errors(
    s: StandardizedDesign,
    spec: PenaltySpec,
    lambdas: np.ndarray,
    test: np.ndarray,
    spec_for_fold: SpecForFold | None,
) -> np.ndarray:
    # a column can be constant on a training split while varying overall
    train = standardize(s.rows(np.flatnonzero(~test)), pin_constant=True)
    fold_spec = spec_for_fold(train) if spec_for_fold is not None else spec
    path = fit_path(train, fold_spec, lambdas=lambdas)

    slopes = path.coefs / train.col_scales
    intercepts = train.y_mean - slopes @ train.col_means
    predicted = s.x[test] @ slopes.T + intercepts
    return np.mean((s.y[test][:, None] - predicted) ** 2, axis=0)


def kfold_cv(
    s: StandardizedDesign,
    spec: PenaltySpec,
    folds: int = config.DEFAULT_FOLDS,
    seed: int = config.DEFAULT_SEED,
    grid_size: int = config.DEFAULT_PATH_SIZE,
    lambdas: np.ndarray | None = None,
    spec_for_fold: SpecForFold | None = None,
) -> CvResult:
    '''Every fold is refit on its own standardized training part over the
    full-data lambda grid and scored by held-out squared error.'''
    if lambdas is None:
        lambdas = path_lambdas(s, spec, grid_size)
    ids = fold_assignment(s.n, folds, seed)

    errors = np.vstack([
        _fold_errors(s, spec, lambdas, ids == k, spec_for_fold)
        for k in range(folds)
    ])
    cv_mean = errors.mean(axis=0)
    cv_se = errors.std(axis=0, ddof=1) / math.sqrt(folds)
    # lambdas descend, so the first minimum is the largest (sparsest) lambda
    best = int(np.argmin(cv_mean))
    return CvResult(
        lambdas=lambdas,
        cv_mean=cv_mean,
        cv_se=cv_se,
        lambda_min=float(lambdas[best]),
        index_min=best,
        fold_ids=ids,
    )


def cv_select(
    s: StandardizedDesign,
    spec: PenaltySpec,
    folds: int = config.DEFAULT_FOLDS,
    seed: int = config.DEFAULT_SEED,
    grid_size: int = config.DEFAULT_PATH_SIZE,
    spec_for_fold: SpecForFold | None = None,
    method: str | None = None,
) -> FitResult:
    '''Full-data path fit at the CV-chosen lambda.'''
    lambdas = path_lambdas(s, spec, grid_size)
    cv = kfold_cv(s, spec, folds, seed, lambdas=lambdas, spec_for_fold=spec_for_fold)
    path = fit_path(s, spec, lambdas=lambdas)
    fit = path.fit_at(cv.index_min, s, method)
    return make_fit(
        fit.method, fit.beta, s,
        tuning=fit.tuning,
        iterations=fit.iterations,
        converged=fit.converged,
        details={"cv": cv, "path": path},
    )



# ===================== Information criterion =====================

def _bic(rss: np.ndarray | float, df: np.ndarray | int, n: int) -> np.ndarray:
    return n * np.log(np.maximum(rss, config.RSS_FLOOR) / n) + math.log(n) * np.asarray(df)


def bic_score(s: StandardizedDesign, fit: FitResult) -> float:
    '''n log(RSS/n) + log(n) df with df the support size.'''
    return float(_bic(s.rss(fit.beta), fit.coef.df, s.n))


def path_bic(path: RegularizationPath, s: StandardizedDesign) -> np.ndarray:
    resid = s.y[:, None] - s.x @ path.coefs.T
    return _bic(np.sum(resid ** 2, axis=0), path.dfs, s.n)



# ===================== Convexity diagnostic =====================

def convexity_diagnostic(
    path: RegularizationPath,
    s: StandardizedDesign,
    spec: PenaltySpec | None = None,
) -> np.ndarray:
    '''Per lambda: smallest eigenvalue of X_A'X_A / n on the active set
    exceeds the penalty's concavity (1/(gamma-1) SCAD, 1/gamma MCP).'''
    spec = spec or path.spec
    if spec.family not in ("scad", "mcp"):
        raise ValueError(f"convexity diagnostic applies to scad/mcp, got {spec.family!r}")
    kappa = spec.concavity

    seen: Dict[Tuple[int, ...], bool] = {}
    flags = np.ones(path.lambdas.size, dtype=bool)
    for k, beta in enumerate(path.coefs):
        active = tuple(int(j) for j in np.flatnonzero(beta))
        if not active:
            continue
        if active not in seen:
            idx = np.asarray(active)
            sub = s.gram[np.ix_(idx, idx)] / s.n
            smallest = linalg.eigvalsh(sub, subset_by_index=[0, 0], check_finite=False)[0]
            seen[active] = bool(smallest > kappa)
        flags[k] = seen[active]
    return flags


def select_gamma(
    s: StandardizedDesign,
    family: Literal["scad", "mcp"],
    folds: int = config.DEFAULT_FOLDS,
    seed: int = config.DEFAULT_SEED,
    ladder: Sequence[float] | None = None,
    grid_size: int = config.DEFAULT_PATH_SIZE,
) -> GammaSelection:
    '''Pick gamma by BIC among the rungs whose BIC-optimal fit passes the
    convexity diagnostic, then choose lambda at that gamma by CV.'''
    if family not in ("scad", "mcp"):
        raise ValueError(f"gamma selection applies to scad/mcp, got {family!r}")
    if ladder is None:
        ladder = config.SCAD_GAMMA_LADDER if family == "scad" else config.MCP_GAMMA_LADDER
    ladder = tuple(sorted(float(g) for g in ladder))
    if not ladder:
        raise ValueError("gamma ladder is empty")

    bics, passes, lambda_flags, chosen = [], [], [], []
    for gamma in ladder:
        spec = PenaltySpec(family, gamma=gamma)
        path = fit_path(s, spec, grid_size)
        scores = path_bic(path, s)
        k = int(np.argmin(scores))
        flags = convexity_diagnostic(path, s, spec)
        bics.append(float(scores[k]))
        passes.append(bool(flags[k]))
        lambda_flags.append(flags)
        chosen.append(k)

    passing = [i for i, ok in enumerate(passes) if ok]
    fallback = not passing
    if fallback:
        best = len(ladder) - 1
        logger.warning("%s: no gamma passed the convexity diagnostic; using gamma=%g", family, ladder[best])
    else:
        # ladder ascends, so min() keeps the smallest gamma on BIC ties
        best = min(passing, key=lambda i: bics[i])

    gamma_star = ladder[best]
    cv = kfold_cv(s, PenaltySpec(family, gamma=gamma_star), folds, seed, grid_size)
    return GammaSelection(
        gamma_ladder=ladder,
        bic_values=np.array(bics),
        convexity_flags=np.array(passes),
        lambda_flags=tuple(lambda_flags),
        bic_index=np.array(chosen),
        gamma_star=gamma_star,
        fallback=fallback,
        cv=cv,
    )


def fit_nonconvex(
    s: StandardizedDesign,
    family: Literal["scad", "mcp"],
    folds: int = config.DEFAULT_FOLDS,
    seed: int = config.DEFAULT_SEED,
    grid_size: int = config.DEFAULT_PATH_SIZE,
    choose_gamma: bool = True,
) -> FitResult:
    '''SCAD or MCP with gamma from select_gamma (or the default gamma) and
    lambda from CV; the per-lambda convexity flags ride along in details.'''
    selection = None
    flags: Tuple[str, ...] = ()
    if choose_gamma:
        selection = select_gamma(s, family, folds, seed, grid_size=grid_size)
        spec = PenaltySpec(family, gamma=selection.gamma_star)
        cv = selection.cv
        if selection.fallback:
            flags = ("no_convex_candidate",)
    else:
        spec = PenaltySpec(family)
        cv = kfold_cv(s, spec, folds, seed, grid_size)

    path = fit_path(s, spec, lambdas=cv.lambdas)
    fit = path.fit_at(cv.index_min, s)
    return make_fit(
        family, fit.beta, s,
        tuning=fit.tuning,
        iterations=fit.iterations,
        converged=fit.converged,
        flags=flags,
        details={
            "cv": cv,
            "gamma_selection": selection,
            "convexity": convexity_diagnostic(path, s, spec),
        },
    )
