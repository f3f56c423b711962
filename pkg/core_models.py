from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from penalized.metrics import MetricsRecord
from penalized.methods import MethodOptions
from penalized.simulator import ScenarioSpec


@dataclass(frozen=True)
class ReplicationJob:
    '''One generated dataset and the methods to run on it.'''
    spec: ScenarioSpec
    replication: int
    methods: Tuple[str, ...]
    options: MethodOptions
    sweep_name: str = ""
    sweep_value: float = float("nan")


@dataclass(frozen=True)
class FailureRecord:
    method: str
    sweep_name: str
    sweep_value: float
    replication: int
    error: str                       # exception class name
    message: str


@dataclass(frozen=True)
class ReplicationOutcome:
    job_index: int
    records: Tuple[MetricsRecord, ...] = ()
    failures: Tuple[FailureRecord, ...] = ()
