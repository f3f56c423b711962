'''
Feeds data to the estimator engine: reads a CSV dataset for single fits,
and runs the Monte Carlo benchmark and timing study as replication jobs on
a bounded process pool, merging results by replication index.
'''
from __future__ import annotations

import logging
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config_loader import RunConfig
from core_models import FailureRecord, ReplicationJob, ReplicationOutcome
from penalized import data_io
from penalized.core import DataError, Dataset, NumericalError, standardize
from penalized.methods import MethodOptions, fit_method
from penalized.metrics import AggregateRecord, MetricsRecord, aggregate_all, compute_metrics
from penalized.simulator import GENERATOR_NAME, ScenarioFamily, gen_dataset

logger = logging.getLogger(__name__)

# errors a single method may raise without stopping the run
RECOVERABLE = (DataError, NumericalError, ValueError, np.linalg.LinAlgError)


class CSVDatasetReader:
    '''Reads a numeric CSV with a header row; one column is the response.'''

    def __init__(self, path: str | Path, response: str) -> None:
        self.path = Path(path)
        self.response = response

    def read(self) -> Dataset:
        if not self.path.exists():
            raise DataError(f"input file not found: {self.path}")
        try:
            frame = pd.read_csv(self.path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise DataError(f"cannot read {self.path}: {exc}") from exc

        if self.response not in frame.columns:
            raise DataError(
                f"response column {self.response!r} not in {self.path.name}; "
                f"columns: {', '.join(map(str, frame.columns))}"
            )
        predictors = frame.drop(columns=[self.response])
        text = [str(c) for c in predictors.columns if not pd.api.types.is_numeric_dtype(predictors[c])]
        if text or not pd.api.types.is_numeric_dtype(frame[self.response]):
            bad = text or [self.response]
            raise DataError(f"non-numeric column(s): {', '.join(bad)}")

        return Dataset(
            predictors.to_numpy(dtype=float),
            frame[self.response].to_numpy(dtype=float),
            tuple(str(c) for c in predictors.columns),
        )



# ============ Replication worker ============

def run_replication(indexed: Tuple[int, ReplicationJob]) -> ReplicationOutcome:
    '''Top-level so the process pool can pickle it. Methods run one after
    another inside the worker so their wall times are comparable.'''
    index, job = indexed
    d = gen_dataset(job.spec, job.replication)
    # CV folds get their own stream, shared by every method of this dataset
    options = replace(job.options, seed=job.spec.seed(job.replication).derived_seed())

    def failure(method: str, exc: BaseException) -> FailureRecord:
        return FailureRecord(
            method=method,
            sweep_name=job.sweep_name,
            sweep_value=job.sweep_value,
            replication=job.replication,
            error=type(exc).__name__,
            message=str(exc),
        )

    try:
        s = standardize(d)
    except DataError as exc:
        return ReplicationOutcome(index, failures=tuple(failure(m, exc) for m in job.methods))

    records: List[MetricsRecord] = []
    failures: List[FailureRecord] = []
    for method in job.methods:
        start = time.perf_counter()
        try:
            fit = fit_method(method, s, options)
        except RECOVERABLE as exc:
            failures.append(failure(method, exc))
            continue
        elapsed = time.perf_counter() - start
        records.append(compute_metrics(
            fit, job.spec, d, elapsed,
            replication=job.replication,
            sweep_name=job.sweep_name,
            sweep_value=job.sweep_value,
        ))
    return ReplicationOutcome(index, records=tuple(records), failures=tuple(failures))


@dataclass(frozen=True)
class BenchResult:
    family: ScenarioFamily
    records: Tuple[MetricsRecord, ...]
    failures: Tuple[FailureRecord, ...]
    aggregates: Tuple[AggregateRecord, ...]

    @property
    def partial(self) -> bool:
        return bool(self.failures)


class BenchmarkRunner:
    '''Runs every method on every replication of every sweep point.'''

    def __init__(self, cfg: RunConfig, progress: bool = True) -> None:
        self.cfg = cfg
        self.progress = progress
        self.options = MethodOptions(
            folds=cfg.folds,
            seed=cfg.seed,
            path_size=cfg.path_size,
            select_gamma=cfg.select_gamma,
            adalasso_fold_weights=cfg.adalasso_fold_weights,
        )

    def jobs(self, family: ScenarioFamily) -> List[ReplicationJob]:
        family = family.with_overrides(self.cfg.replications, self.cfg.seed)
        jobs: List[ReplicationJob] = []
        for value in family.points():
            spec = family.spec_at(value)
            for r in range(spec.replications):
                jobs.append(ReplicationJob(
                    spec=spec,
                    replication=r,
                    methods=self.cfg.methods,
                    options=self.options,
                    sweep_name=family.sweep_name,
                    sweep_value=float(value),
                ))
        return jobs

    def _execute(self, jobs: Sequence[ReplicationJob]) -> Iterator[ReplicationOutcome]:
        indexed = list(enumerate(jobs))
        workers = max(1, min(self.cfg.workers, len(indexed)))
        bar = dict(total=len(indexed), desc="replications", unit="job", disable=not self.progress)
        if workers == 1:
            yield from tqdm(map(run_replication, indexed), **bar)
            return
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves input order, so merging is by job index
            chunk = max(1, len(indexed) // (workers * 8))
            yield from tqdm(pool.map(run_replication, indexed, chunksize=chunk), **bar)

    def run(self, family: ScenarioFamily) -> BenchResult:
        jobs = self.jobs(family)
        logger.info("%s: %d jobs (%d sweep points), methods %s, %d worker(s)",
                    family.name, len(jobs), len(family.points()), ",".join(self.cfg.methods), self.cfg.workers)
        outcomes = sorted(self._execute(jobs), key=lambda o: o.job_index)

        records = tuple(rec for o in outcomes for rec in o.records)
        failures = tuple(f for o in outcomes for f in o.failures)
        for f in failures:
            logger.warning("%s replication %d (%s=%s) failed: %s: %s",
                           f.method, f.replication, f.sweep_name or "point", f.sweep_value, f.error, f.message)
        aggregates = tuple(aggregate_all(records)) if records else ()
        return BenchResult(family=family, records=records, failures=failures, aggregates=aggregates)

    def metadata(self, family: ScenarioFamily) -> dict:
        return {
            "generator": GENERATOR_NAME,
            "numpy_version": np.__version__,
            "base_seed": self.cfg.seed,
            "replications": self.cfg.replications or family.base.replications,
            "methods": list(self.cfg.methods),
            "scenario": family.name,
            "sweep": family.sweep_name or None,
            "folds": self.cfg.folds,
            "path_size": self.cfg.path_size,
            "select_gamma": self.cfg.select_gamma,
            "adalasso_fold_weights": self.cfg.adalasso_fold_weights,
        }

    def write(self, result: BenchResult, outdir: Path) -> List[Path]:
        name = result.family.name
        written = data_io.write_metric_csvs(outdir, name, result.aggregates)
        written.append(data_io.write_records_csv(outdir / f"{name}.records.csv", result.records))
        written.append(data_io.write_errors_csv(outdir / f"{name}.errors.csv", result.failures))
        written.append(data_io.write_metadata(data_io.metadata_path(outdir, name), self.metadata(result.family)))
        return written


def hardware_description() -> str:
    cpu = platform.processor() or platform.machine() or "unknown cpu"
    return f"{cpu}; {os.cpu_count() or 1} cpus; {platform.system()} {platform.release()}; python {platform.python_version()}"


class TimingRunner(BenchmarkRunner):
    '''Wall-clock study: a single-point scenario, one worker, full tuned
    procedures timed per method.'''

    def __init__(self, cfg: RunConfig, progress: bool = True) -> None:
        if cfg.workers != 1:
            logger.warning("timing runs on one worker; ignoring workers=%d", cfg.workers)
            cfg = replace(cfg, workers=1)
        super().__init__(cfg, progress)

    def run(self, family: ScenarioFamily) -> BenchResult:
        if family.sweep_name:
            raise DataError(f"timing needs a single-point scenario; {family.name!r} sweeps {family.sweep_name}")
        return super().run(family)

    def write(self, result: BenchResult, outdir: Path) -> List[Path]:
        name = result.family.name
        hardware = hardware_description()
        meta = {**self.metadata(result.family), "hardware": hardware}
        return [
            data_io.write_timing_csv(outdir / f"{name}.timing.csv", result.aggregates, hardware),
            data_io.write_records_csv(outdir / f"{name}.records.csv", result.records),
            data_io.write_errors_csv(outdir / f"{name}.errors.csv", result.failures),
            data_io.write_metadata(data_io.metadata_path(outdir, name), meta),
        ]
