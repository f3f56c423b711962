'''
Per-replication evaluation metrics and their Monte Carlo aggregates.
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from . import config
from .core import Dataset, EmptyGroup, FitResult, ShapeError
from .simulator import ScenarioSpec

logger = logging.getLogger(__name__)

# metrics averaged by aggregate(), in output order
AGGREGATED: Tuple[str, ...] = ("mse", "me", "ic1", "ic2", "elapsed", "mse_std", "me_std")


@dataclass(frozen=True)
class MetricsRecord:
    method: str
    replication: int
    mse: float                       # ||b_hat - b||^2, original-scale slopes
    me: float                        # (b_hat - b)' X'X (b_hat - b), realized X
    ic1: int                         # true variables missed
    ic2: int                         # null variables selected
    elapsed: float                   # seconds, tuning included
    mse_std: float = 0.0             # same two on the standardized scale
    me_std: float = 0.0
    sweep_name: str = ""
    sweep_value: float = float("nan")

    def __post_init__(self) -> None:
        if self.mse < 0.0 or self.me < 0.0 or self.ic1 < 0 or self.ic2 < 0:
            raise ValueError(f"negative metric in record for {self.method}, replication {self.replication}")

    def value(self, metric: str) -> float:
        return float(getattr(self, metric))


@dataclass(frozen=True)
class AggregateRecord:
    method: str
    sweep_name: str
    sweep_value: float
    replications: int
    means: Dict[str, float] = field(default_factory=dict)
    stderrs: Dict[str, float] = field(default_factory=dict)
    se_defined: bool = True          # False for a single replication (stderr reported 0)


def _quadratic(delta: np.ndarray, x: np.ndarray) -> float:
    fitted = x @ delta
    return max(float(fitted @ fitted), 0.0)


def compute_metrics(
    fit: FitResult,
    truth: ScenarioSpec,
    d: Dataset,
    elapsed: float,
    replication: int = 0,
    sweep_name: str = "",
    sweep_value: float = float("nan"),
) -> MetricsRecord:
    '''Score a fit against the generating coefficients. Supports are
    compared by exact zeros; the intercept is not scored.'''
    beta = truth.beta_array
    slopes = np.asarray(fit.coef.slopes)
    if slopes.shape != beta.shape or d.p != beta.shape[0]:
        raise ShapeError(f"fit has {slopes.shape[0]} slopes, truth {beta.shape[0]}, data {d.p} columns")

    delta = slopes - beta
    true_nz = beta != 0.0
    est_nz = slopes != 0.0

    # standardized scale: b_std = b * scale, with the scales of this replication
    scales = np.sqrt(np.mean((d.x_raw - d.x_raw.mean(axis=0)) ** 2, axis=0))
    delta_std = delta * scales
    x_std = (d.x_raw - d.x_raw.mean(axis=0)) / np.where(scales > 0.0, scales, 1.0)

    return MetricsRecord(
        method=fit.method,
        replication=int(replication),
        mse=float(delta @ delta),
        me=_quadratic(delta, d.x_raw),
        ic1=int(np.count_nonzero(true_nz & ~est_nz)),
        ic2=int(np.count_nonzero(~true_nz & est_nz)),
        elapsed=float(elapsed),
        mse_std=float(delta_std @ delta_std),
        me_std=_quadratic(delta_std, x_std),
        sweep_name=sweep_name,
        sweep_value=float(sweep_value),
    )


def aggregate(records: Iterable[MetricsRecord]) -> AggregateRecord:
    '''Mean and standard error (sample std / sqrt(R)) of every metric over
    one (method, sweep value) group, summed in replication order.'''
    group = sorted(records, key=lambda rec: rec.replication)
    if not group:
        raise EmptyGroup("cannot aggregate an empty group of metric records")
    first = group[0]
    count = len(group)

    means: Dict[str, float] = {}
    stderrs: Dict[str, float] = {}
    for metric in AGGREGATED:
        values = np.array([rec.value(metric) for rec in group])
        means[metric] = float(values.mean())
        stderrs[metric] = float(values.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    if count == 1:
        logger.warning("%s at %s=%g: one replication, standard errors reported as 0",
                       first.method, first.sweep_name or "point", first.sweep_value)

    return AggregateRecord(
        method=first.method,
        sweep_name=first.sweep_name,
        sweep_value=first.sweep_value,
        replications=count,
        means=means,
        stderrs=stderrs,
        se_defined=count > 1,
    )


def _group_key(rec: MetricsRecord) -> Tuple[float, int, str]:
    value = -math.inf if math.isnan(rec.sweep_value) else rec.sweep_value
    return value, _method_rank(rec.method), rec.method


def _method_rank(method: str) -> int:
    roster = config.METHODS + config.EXTRA_METHODS
    return roster.index(method) if method in roster else len(roster)


def aggregate_all(records: Sequence[MetricsRecord]) -> List[AggregateRecord]:
    '''One AggregateRecord per (sweep value, method), ordered by sweep value
    then roster position.'''
    ordered = sorted(records, key=_group_key)
    return [aggregate(group) for _, group in groupby(ordered, key=_group_key)]
