'''
Method roster: every tag maps to its complete tuned procedure, so the
harness times and scores one call per (method, dataset).
'''
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from . import config
from .classic import fit_ols, fit_ridge, fit_ridge_gcv
from .core import DataError, FitResult, StandardizedDesign
from .garrote import fit_garrote, fit_ridge_garrote
from .shrinkage import PenaltySpec, fit_adaptive_lasso, fit_path, lambda_max
from .tuning import cv_select, fit_nonconvex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MethodOptions:
    folds: int = config.DEFAULT_FOLDS
    seed: int = config.DEFAULT_SEED
    path_size: int = config.DEFAULT_PATH_SIZE
    ridge_lambda: float | None = None    # ridge / ngridge: skip GCV
    fixed_lambda: float | None = None    # path families: skip CV
    select_gamma: bool = True
    adalasso_fold_weights: bool = False


class UnknownMethod(DataError):
    ''' a method tag is not on the roster '''


def resolve_tag(tag: str) -> str:
    tag = config.METHOD_ALIASES.get(tag, tag)
    if tag not in config.METHODS and tag not in config.EXTRA_METHODS:
        known = ", ".join(config.METHODS + config.EXTRA_METHODS + tuple(config.METHOD_ALIASES))
        raise UnknownMethod(f"unknown method {tag!r}; expected one of: {known}")
    return tag


def _fixed_point(s: StandardizedDesign, spec: PenaltySpec, lam: float) -> FitResult:
    '''Path fit down to a user-given lambda, warm-started from lambda_max.'''
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive for {spec.family}, got {lam}")
    top = lambda_max(s, spec)
    lambdas = np.geomspace(top, lam, config.DEFAULT_PATH_SIZE) if top > lam else np.array([lam])
    path = fit_path(s, spec, lambdas=lambdas)
    return path.fit_at(lambdas.size - 1, s)


def _path_family(family: str) -> Callable[[StandardizedDesign, MethodOptions], FitResult]:
    def run(s: StandardizedDesign, opts: MethodOptions) -> FitResult:
        spec = PenaltySpec(family, couple_l2=(family == "enet"))
        if opts.fixed_lambda is not None:
            return _fixed_point(s, spec, opts.fixed_lambda)
        return cv_select(s, spec, opts.folds, opts.seed, opts.path_size)
    return run


def _nonconvex(family: str) -> Callable[[StandardizedDesign, MethodOptions], FitResult]:
    def run(s: StandardizedDesign, opts: MethodOptions) -> FitResult:
        if opts.fixed_lambda is not None:
            return _fixed_point(s, PenaltySpec(family), opts.fixed_lambda)
        return fit_nonconvex(s, family, opts.folds, opts.seed, opts.path_size, choose_gamma=opts.select_gamma)
    return run


def _ridge(s: StandardizedDesign, opts: MethodOptions) -> FitResult:
    lam = opts.ridge_lambda if opts.ridge_lambda is not None else opts.fixed_lambda
    if lam is None:
        return fit_ridge_gcv(s)
    return fit_ridge(s, lam)


def _adalasso(s: StandardizedDesign, opts: MethodOptions) -> FitResult:
    if opts.fixed_lambda is not None:
        logger.warning("adalasso ignores a fixed lambda; both stages are tuned by CV")
    return fit_adaptive_lasso(s, opts.folds, opts.seed, opts.adalasso_fold_weights, opts.path_size)


ROSTER: Dict[str, Callable[[StandardizedDesign, MethodOptions], FitResult]] = {
    "ols": lambda s, opts: fit_ols(s),
    "ridge": _ridge,
    "ng-aic": lambda s, opts: fit_garrote(s, "aic"),
    "ng-bic": lambda s, opts: fit_garrote(s, "bic"),
    "ngridge-aic": lambda s, opts: fit_ridge_garrote(s, "aic", opts.ridge_lambda),
    "ngridge-bic": lambda s, opts: fit_ridge_garrote(s, "bic", opts.ridge_lambda),
    "lasso": _path_family("lasso"),
    "enet": _path_family("enet"),
    "adalasso": _adalasso,
    "scad": _nonconvex("scad"),
    "mcp": _nonconvex("mcp"),
}


def fit_method(tag: str, s: StandardizedDesign, options: MethodOptions | None = None) -> FitResult:
    '''Run the tuned procedure behind a method tag on a standardized design.'''
    return ROSTER[resolve_tag(tag)](s, options or MethodOptions())
