from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

import main
from config_loader import ConfigError, load_config, load_scenario, scenario_from_mapping
from data_integration import BenchmarkRunner, CSVDatasetReader, TimingRunner
from penalized import config, data_io
from penalized.core import DataError
from plotter import read_metric_tables, write_gnuplot_script

SMALL_SCENARIO = {
    "name": "small",
    "n": 30,
    "beta0": 1.0,
    "beta": [2.0, 0.0, 1.0, 0.0],
    "sigma": 1.0,
    "rho_grid": [0.0, 0.5],
    "replications": 3,
}
DETERMINISTIC_METRICS = ("mse", "me", "ic1", "ic2", "mse_std", "me_std")


def _write_yaml(path: Path, data) -> Path:
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


@pytest.fixture
def run_config(tmp_path) -> Path:
    return _write_yaml(tmp_path / "run.yml", {"folds": 5, "path_size": 20, "seed": 1})


@pytest.fixture
def scenario_file(tmp_path) -> Path:
    return _write_yaml(tmp_path / "small.yml", SMALL_SCENARIO)


@pytest.fixture
def csv_input(tmp_path, rng) -> Path:
    x = rng.standard_normal((30, 3))
    frame = pd.DataFrame(x, columns=["a", "b", "c"])
    frame["y"] = 1.0 + 2.0 * frame["a"] - frame["c"] + 0.3 * rng.standard_normal(30)
    path = tmp_path / "data.csv"
    frame.to_csv(path, index=False)
    return path


def _bench(scenario_file, run_config, outdir, *extra) -> int:
    return main.main([
        "bench", "--config", str(scenario_file), "--run-config", str(run_config),
        "--method", "ols,lasso,ng-bic", "--outdir", str(outdir), "--no-progress", *extra,
    ])


class TestRunConfig:
    def test_defaults_without_a_file(self):
        cfg = load_config(None)
        assert cfg.methods == config.METHODS
        assert cfg.replications is None and cfg.workers == 1
        assert cfg.adalasso_fold_weights

    def test_method_string_and_alias(self, tmp_path):
        cfg = load_config(_write_yaml(tmp_path / "c.yml", {"methods": "lasso, ng-cp,lasso"}))
        assert cfg.methods == ("lasso", "ng-aic")

    @pytest.mark.parametrize("raw", [
        {"methods": ["lasso", "lars"]},
        {"replications": 0},
        {"workers": "many"},
        {"seed": -1},
        {"methods": []},
    ])
    def test_invalid(self, tmp_path, raw):
        with pytest.raises(ConfigError):
            load_config(_write_yaml(tmp_path / "c.yml", raw))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yml")


class TestScenarioFile:
    def test_z_placeholders(self):
        family = scenario_from_mapping({
            "n": 40, "beta": [3, 1.5, "z", None, 2], "sigma": 1, "rho": 0.5, "z_grid": [0, 0.5],
        })
        assert family.sweep_name == "z" and family.z_slots == (2, 3)
        assert family.spec_at(0.5).beta == (3.0, 1.5, 0.5, 0.5, 2.0)
        assert family.spec_at(0.5).rho == 0.5

    def test_dimension_sweep_pads_with_zeros(self):
        family = scenario_from_mapping({"n": 50, "beta": [1, 1], "sigma": 1, "p_grid": [4, 6]})
        assert family.base.p == 4
        assert family.spec_at(6).beta == (1.0, 1.0, 0.0, 0.0, 0.0, 0.0)

    def test_json_file_is_named_after_its_stem(self, tmp_path):
        raw = {key: value for key, value in SMALL_SCENARIO.items() if key != "name"}
        path = tmp_path / "corr.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        family = load_scenario(path)
        assert family.name == "corr"
        assert family.points() == (0.0, 0.5)
        assert family.base.replications == 3

    @pytest.mark.parametrize("raw", [
        {"n": 40, "sigma": 1},
        {"n": 40, "beta": [1, "z"], "sigma": 1},
        {"n": 40, "beta": [1, 2], "sigma": 1, "rho_grid": [0.1], "z_grid": [0.2]},
        {"n": 40, "beta": [1, 2], "sigma": 0},
        {"n": 40, "beta": [1, 2], "sigma": 1, "rho": 1.5},
        {"n": 40, "beta": [1, "x"], "sigma": 1},
        {"n": 40, "beta": [1, 1, 1], "sigma": 1, "p_grid": [2, 4]},
    ])
    def test_invalid(self, raw):
        with pytest.raises(ConfigError):
            scenario_from_mapping(raw)


class TestCsvReader:
    def test_reads_named_columns(self, csv_input):
        d = CSVDatasetReader(csv_input, "y").read()
        assert d.names == ("a", "b", "c")
        assert d.x_raw.shape == (30, 3)

    def test_missing_response(self, csv_input):
        with pytest.raises(DataError):
            CSVDatasetReader(csv_input, "target").read()

    def test_text_column(self, tmp_path):
        path = tmp_path / "text.csv"
        pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": ["u", "v", "w"], "y": [0.0, 1.0, 0.5]}).to_csv(path, index=False)
        with pytest.raises(DataError):
            CSVDatasetReader(path, "y").read()


class TestFitCommand:
    def test_prints_a_json_record(self, csv_input, capsys):
        code = main.main(["fit", "--method", "lasso", "--input", str(csv_input), "--response", "y", "--folds", "5"])
        assert code == main.EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["method"] == "lasso"
        assert set(record["coefficients"]) == {"a", "b", "c"}
        assert "a" in record["support"]
        assert "lambda" in record["tuning"]

    def test_unknown_method_is_a_usage_error(self, csv_input, capsys):
        code = main.main(["fit", "--method", "lars", "--input", str(csv_input), "--response", "y"])
        assert code == main.EXIT_INPUT
        assert "usage" in capsys.readouterr().err

    def test_missing_argument(self):
        assert main.main(["fit", "--method", "lasso"]) == main.EXIT_INPUT

    def test_missing_input_file(self, tmp_path):
        code = main.main(["fit", "--method", "ols", "--input", str(tmp_path / "none.csv"), "--response", "y"])
        assert code == main.EXIT_INPUT

    def test_unpenalized_ridge_on_collinear_columns(self, tmp_path, rng):
        x = rng.standard_normal((20, 2))
        frame = pd.DataFrame({"a": x[:, 0], "b": x[:, 1], "c": x[:, 0] + x[:, 1], "y": rng.standard_normal(20)})
        path = tmp_path / "collinear.csv"
        frame.to_csv(path, index=False)
        code = main.main(["fit", "--method", "ridge", "--lambda", "0", "--input", str(path), "--response", "y"])
        assert code == main.EXIT_NUMERICAL

    def test_scenarios_listing(self, capsys):
        assert main.main(["scenarios"]) == main.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert [json.loads(line)["name"] for line in lines][:3] == ["case1", "case2", "case3"]


class TestBench:
    def test_outputs(self, tmp_path, scenario_file, run_config):
        outdir = tmp_path / "out"
        assert _bench(scenario_file, run_config, outdir) == main.EXIT_OK

        for metric in config.METRICS:
            table = pd.read_csv(outdir / f"small.{metric}.csv")
            assert list(table.columns) == data_io.METRIC_HEADER
            # methods x sweep points
            assert len(table) == 3 * 2
            assert list(table["method"][:3]) == ["ols", "ng-bic", "lasso"]
            assert (table["replications"] == 3).all()
        records = pd.read_csv(outdir / "small.records.csv")
        assert len(records) == 3 * 2 * 3
        assert pd.read_csv(outdir / "small.errors.csv").empty
        meta = json.loads((outdir / "small.metadata.json").read_text())
        assert meta["base_seed"] == 1 and meta["scenario"] == "small"
        script = (outdir / "small.gp").read_text()
        assert 'set output "small.mse.png"' in script

    def test_identical_runs_give_identical_tables(self, tmp_path, scenario_file, run_config):
        first, second = tmp_path / "a", tmp_path / "b"
        assert _bench(scenario_file, run_config, first) == main.EXIT_OK
        assert _bench(scenario_file, run_config, second, "--workers", "2") == main.EXIT_OK
        for metric in DETERMINISTIC_METRICS:
            name = f"small.{metric}.csv"
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_seed_changes_results(self, tmp_path, scenario_file, run_config):
        first, second = tmp_path / "a", tmp_path / "b"
        _bench(scenario_file, run_config, first)
        _bench(scenario_file, run_config, second, "--seed", "2")
        assert (first / "small.mse.csv").read_bytes() != (second / "small.mse.csv").read_bytes()

    def test_failed_fits_are_reported(self, tmp_path, run_config):
        wide = _write_yaml(tmp_path / "wide.yml", {
            "n": 5, "beta": [1, 0, 0, 0, 0, 0, 0, 1], "sigma": 1, "rho": 0.3, "replications": 2,
        })
        outdir = tmp_path / "out"
        code = main.main([
            "bench", "--config", str(wide), "--run-config", str(run_config),
            "--method", "ols,ridge", "--outdir", str(outdir), "--no-progress",
        ])
        assert code == main.EXIT_PARTIAL
        errors = pd.read_csv(outdir / "wide.errors.csv")
        assert set(errors["method"]) == {"ols"}
        assert set(errors["error"]) == {"SingularGram"}
        assert len(pd.read_csv(outdir / "wide.mse.csv")) == 1

    def test_unknown_scenario(self, tmp_path, run_config):
        code = main.main(["bench", "--scenario", "case9", "--run-config", str(run_config), "--outdir", str(tmp_path)])
        assert code == main.EXIT_INPUT

    def test_jobs_cover_every_point(self, scenario_file):
        cfg = load_config(None)
        family = load_scenario(scenario_file)
        jobs = BenchmarkRunner(cfg, progress=False).jobs(family)
        assert [(job.sweep_value, job.replication) for job in jobs] == [
            (0.0, 0), (0.0, 1), (0.0, 2), (0.5, 0), (0.5, 1), (0.5, 2),
        ]


class TestTiming:
    def test_timing_table(self, tmp_path, run_config):
        point = {key: value for key, value in SMALL_SCENARIO.items() if key != "rho_grid"}
        scenario = _write_yaml(tmp_path / "point.yml", {**point, "name": "point"})
        outdir = tmp_path / "out"
        code = main.main([
            "time", "--config", str(scenario), "--run-config", str(run_config),
            "--method", "ols,lasso", "--replications", "2", "--workers", "3",
            "--outdir", str(outdir), "--no-progress",
        ])
        assert code == main.EXIT_OK
        table = pd.read_csv(outdir / "point.timing.csv")
        assert list(table["method"]) == ["ols", "lasso"]
        assert (table["mean_seconds"] > 0).all()
        assert (table["replications"] == 2).all()
        assert "hardware" in json.loads((outdir / "point.metadata.json").read_text())

    def test_swept_scenario_is_rejected(self, scenario_file):
        with pytest.raises(DataError):
            TimingRunner(load_config(None), progress=False).run(load_scenario(scenario_file))


class TestPlots:
    def test_gnuplot_script_per_metric(self, tmp_path):
        path = write_gnuplot_script(tmp_path, "case1", ["ols", "lasso"])
        text = path.read_text()
        assert path.name == "case1.gp"
        for metric in config.METRICS:
            assert f'"case1.{metric}.csv"' in text
        assert 'methods = "ols lasso"' in text

    def test_plot_command(self, tmp_path, scenario_file, run_config):
        outdir = tmp_path / "out"
        _bench(scenario_file, run_config, outdir)
        tables = read_metric_tables(outdir)
        assert set(tables) == {("small", metric) for metric in config.METRICS}
        assert main.main(["plot", "--outdir", str(outdir)]) == main.EXIT_OK
        assert (outdir / "small.mse.png").exists()
        assert (outdir / "aggregates.xlsx").exists()

    def test_scenarios_sharing_a_directory(self, tmp_path, scenario_file, run_config):
        dotted = _write_yaml(tmp_path / "dotted.yml", {**SMALL_SCENARIO, "name": "small.v2"})
        outdir = tmp_path / "out"
        assert _bench(scenario_file, run_config, outdir) == main.EXIT_OK
        assert _bench(dotted, run_config, outdir) == main.EXIT_OK
        assert json.loads((outdir / "small.metadata.json").read_text())["scenario"] == "small"
        assert json.loads((outdir / "small.v2.metadata.json").read_text())["scenario"] == "small.v2"
        tables = read_metric_tables(outdir)
        assert {scenario for scenario, _ in tables} == {"small", "small.v2"}

    def test_plot_without_tables(self, tmp_path):
        assert main.main(["plot", "--outdir", str(tmp_path)]) == main.EXIT_INPUT


def test_replication_override(tmp_path, run_config, scenario_file):
    outdir = tmp_path / "out"
    _bench(scenario_file, run_config, outdir, "--replications", "5")
    table = pd.read_csv(outdir / "small.mse.csv")
    assert (table["replications"] == 5).all()
    assert np.all(table["stderr"] >= 0.0)
    assert len(pd.read_csv(outdir / "small.records.csv")) == 3 * 2 * 5
