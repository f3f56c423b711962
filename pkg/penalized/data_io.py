from __future__ import annotations

import json
import logging
import math
from csv import writer
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence

from . import config
from .metrics import AggregateRecord, MetricsRecord

logger = logging.getLogger(__name__)

METRIC_HEADER: List[str] = [
    "method", "sweep_name", "sweep_value", "metric", "mean", "stderr", "replications", "log_y",
]
RECORD_HEADER: List[str] = [
    "method", "sweep_name", "sweep_value", "replication",
    "mse", "me", "ic1", "ic2", "elapsed", "mse_std", "me_std",
]
ERROR_HEADER: List[str] = ["method", "sweep_name", "sweep_value", "replication", "error", "message"]
TIMING_HEADER: List[str] = ["method", "mean_seconds", "stderr_seconds", "replications", "se_defined", "hardware"]


def _num(value: float) -> str:
    '''Fixed repr for CSV cells so identical runs give identical bytes.'''
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.10g}"


def metric_csv_path(outdir: str | Path, scenario: str, metric: str) -> Path:
    return Path(outdir) / f"{scenario}.{metric}.csv"


def metadata_path(outdir: str | Path, scenario: str) -> Path:
    return Path(outdir) / f"{scenario}.metadata.json"


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            csv_writer = writer(fh, lineterminator="\n")
            csv_writer.writerow(header)
            for row in rows:
                csv_writer.writerow(row)
    except OSError as exc:
        logger.error("Cannot write CSV to %s: %s", path, exc)
        raise
    return path


def write_metric_csvs(
    outdir: str | Path,
    scenario: str,
    aggregates: Sequence[AggregateRecord],
    metrics: Sequence[str] = config.METRICS,
) -> List[Path]:
    '''One CSV per metric, rows ordered as the aggregates are.'''
    written: List[Path] = []
    for metric in metrics:
        log_y = "1" if metric in config.LOG_SCALE_METRICS else "0"
        rows = (
            [
                agg.method,
                agg.sweep_name,
                _num(agg.sweep_value),
                metric,
                _num(agg.means[metric]),
                _num(agg.stderrs[metric]),
                str(agg.replications),
                log_y,
            ]
            for agg in aggregates
        )
        written.append(_write_rows(metric_csv_path(outdir, scenario, metric), METRIC_HEADER, rows))
    return written


def write_records_csv(path: str | Path, records: Sequence[MetricsRecord]) -> Path:
    rows = (
        [
            rec.method, rec.sweep_name, _num(rec.sweep_value), str(rec.replication),
            _num(rec.mse), _num(rec.me), str(rec.ic1), str(rec.ic2),
            _num(rec.elapsed), _num(rec.mse_std), _num(rec.me_std),
        ]
        for rec in records
    )
    return _write_rows(Path(path), RECORD_HEADER, rows)


def write_errors_csv(path: str | Path, failures: Sequence[Any]) -> Path:
    '''Failures carry method, sweep_name, sweep_value, replication, error, message.'''
    rows = (
        [f.method, f.sweep_name, _num(f.sweep_value), str(f.replication), f.error, f.message]
        for f in failures
    )
    return _write_rows(Path(path), ERROR_HEADER, rows)


def write_timing_csv(path: str | Path, aggregates: Sequence[AggregateRecord], hardware: str) -> Path:
    rows = (
        [
            agg.method,
            _num(agg.means["elapsed"]),
            _num(agg.stderrs["elapsed"]),
            str(agg.replications),
            "1" if agg.se_defined else "0",
            hardware,
        ]
        for agg in aggregates
    )
    return _write_rows(Path(path), TIMING_HEADER, rows)


def write_metadata(path: str | Path, metadata: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
