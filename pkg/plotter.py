from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
from adjustText import adjust_text

from penalized import config, data_io

logger = logging.getLogger(__name__)

AXIS_LABELS = {"rho": "correlation rho", "z": "small coefficient z", "p": "number of predictors p"}
METRIC_LABELS = {
    "mse": "MSE", "me": "ME", "ic1": "IC1 (missed)", "ic2": "IC2 (false positives)",
    "elapsed": "seconds", "mse_std": "MSE (standardized)", "me_std": "ME (standardized)",
}


def write_gnuplot_script(
    outdir: str | Path,
    scenario: str,
    methods: Sequence[str],
    metrics: Sequence[str] = config.METRICS,
) -> Path:
    '''Gnuplot script drawing one PNG per metric from the metric CSVs.'''
    outdir = Path(outdir)
    roster = " ".join(methods)
    lines: List[str] = [
        f"# {scenario}: run with `gnuplot {scenario}.gp` inside this directory",
        'set datafile separator ","',
        "set terminal pngcairo size 900,650",
        "set key outside right",
        "set grid",
        f'methods = "{roster}"',
    ]
    for metric in metrics:
        csv_name = data_io.metric_csv_path(".", scenario, metric).name
        lines += [
            "",
            f'set output "{scenario}.{metric}.png"',
            f'set title "{scenario}: {METRIC_LABELS.get(metric, metric)}"',
            "set logscale y" if metric in config.LOG_SCALE_METRICS else "unset logscale y",
            f'plot for [m in methods] "{csv_name}" every ::1 '
            f'using 3:(strcol(1) eq m ? $5 : NaN) with linespoints title m',
        ]
    path = outdir / f"{scenario}.gp"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_metric_tables(outdir: str | Path) -> Dict[Tuple[str, str], pd.DataFrame]:
    '''(scenario, metric) -> aggregate table, for every metric CSV found.'''
    tables: Dict[Tuple[str, str], pd.DataFrame] = {}
    for path in sorted(Path(outdir).glob("*.csv")):
        parts = path.name.rsplit(".", 2)
        if len(parts) != 3 or parts[1] not in config.METRICS:
            continue
        frame = pd.read_csv(path)
        if list(frame.columns) != data_io.METRIC_HEADER:
            logger.warning("skipping %s: unexpected header", path.name)
            continue
        tables[(parts[0], parts[1])] = frame
    return tables


class FigurePlotter:
    def __init__(self, outdir: str | Path) -> None:
        self.output_dir = Path(outdir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def plot(self, tables: Dict[Tuple[str, str], pd.DataFrame]) -> List[Path]:
        saved: List[Path] = []
        if not tables:
            logger.warning("no aggregate tables to plot")
            return saved

        for (scenario, metric), frame in sorted(tables.items()):
            swept = frame["sweep_value"].notna().any()
            fig, ax = plt.subplots(figsize=(10, 7))
            texts = []
            for method, rows in frame.groupby("method", sort=False):
                rows = rows.sort_values("sweep_value")
                if swept:
                    ax.errorbar(rows["sweep_value"], rows["mean"], yerr=rows["stderr"],
                                marker="o", markersize=3, capsize=2, label=method)
                    last = rows.iloc[-1]
                    texts.append(ax.text(last["sweep_value"], last["mean"], method, fontsize=8))
                else:
                    bar = ax.bar(method, rows["mean"].iloc[0], yerr=rows["stderr"].iloc[0], capsize=3)
                    texts.append(ax.text(bar[0].get_x(), rows["mean"].iloc[0], method, fontsize=8))

            if frame["log_y"].iloc[0] == 1 and (frame["mean"] > 0).all():
                ax.set_yscale("log")
            if texts:
                adjust_text(texts, ax=ax, arrowprops=dict(arrowstyle="-", color="gray", lw=0.5))

            sweep_name = frame["sweep_name"].dropna().iloc[0] if frame["sweep_name"].notna().any() else ""
            ax.set_xlabel(AXIS_LABELS.get(sweep_name, "method"), fontsize=12)
            ax.set_ylabel(METRIC_LABELS.get(metric, metric), fontsize=12)
            ax.set_title(f"{scenario}: {METRIC_LABELS.get(metric, metric)}", fontsize=14)
            ax.grid(True, linestyle="--", alpha=0.6)
            if swept:
                ax.legend(fontsize=8, loc="best")

            out_path = self.output_dir / f"{scenario}.{metric}.png"
            try:
                fig.savefig(out_path, dpi=200, bbox_inches="tight")
                saved.append(out_path)
                logger.info("Saved plot: %s", out_path)
            except OSError as exc:
                logger.error("Could not save %s: %s", out_path, exc)
            finally:
                plt.close(fig)
        return saved

    def save_excel(self, tables: Dict[Tuple[str, str], pd.DataFrame]) -> Path | None:
        if not tables:
            logger.warning("no aggregate tables for Excel")
            return None
        out_path = self.output_dir / "aggregates.xlsx"
        try:
            with pd.ExcelWriter(out_path) as writer:
                for (scenario, metric), frame in sorted(tables.items()):
                    frame.to_excel(writer, sheet_name=f"{scenario}.{metric}"[:31], index=False)
        except OSError as exc:
            logger.error("Failed to save Excel: %s", exc)
            return None
        logger.info("Saved Excel: %s", out_path)
        return out_path
