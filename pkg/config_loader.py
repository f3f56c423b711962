from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import yaml

from penalized import config
from penalized.core import DataError
from penalized.methods import resolve_tag
from penalized.simulator import ScenarioFamily, ScenarioSpec


class ConfigError(Exception):
    '''when the run configuration or a scenario file is invalid'''


@dataclass(frozen=True)
class RunConfig:
    methods: Tuple[str, ...]
    replications: int | None         # None keeps each scenario's own count
    seed: int
    workers: int
    outdir: Path
    folds: int = config.DEFAULT_FOLDS
    path_size: int = config.DEFAULT_PATH_SIZE
    select_gamma: bool = True
    adalasso_fold_weights: bool = True


def _read_yaml(path: Path, what: str) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"{what} file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"Error reading {what} file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{what} file {path} must hold a mapping")
    return raw


def parse_methods(raw_val: Any) -> Tuple[str, ...]:
    if raw_val is None:
        return config.METHODS
    if isinstance(raw_val, str):
        raw_val = [m.strip() for m in raw_val.split(",")]
    if not isinstance(raw_val, list):
        raise ConfigError("methods must be a list or comma-separated string")
    tags: List[str] = []
    for item in raw_val:
        item = str(item).strip()
        if not item:
            continue
        try:
            tag = resolve_tag(item)
        except DataError as exc:
            raise ConfigError(str(exc)) from exc
        if tag not in tags:
            tags.append(tag)
    if not tags:
        raise ConfigError("method list is empty")
    return tuple(tags)


def _positive(raw: Dict[str, Any], key: str, default: int | None) -> int | None:
    if raw.get(key) is None:
        return default
    try:
        value = int(raw[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from exc
    if value < 1:
        raise ConfigError(f"{key} must be >= 1, got {value}")
    return value


def build_run_config(raw: Dict[str, Any]) -> RunConfig:
    seed = int(raw.get("seed", config.DEFAULT_SEED))
    if seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {seed}")
    return RunConfig(
        methods=parse_methods(raw.get("methods")),
        replications=_positive(raw, "replications", None),
        seed=seed,
        workers=_positive(raw, "workers", config.DEFAULT_WORKERS),
        outdir=Path(str(raw.get("outdir", "results"))),
        folds=_positive(raw, "folds", config.DEFAULT_FOLDS),
        path_size=_positive(raw, "path_size", config.DEFAULT_PATH_SIZE),
        select_gamma=bool(raw.get("select_gamma", True)),
        adalasso_fold_weights=bool(raw.get("adalasso_fold_weights", True)),
    )


def load_config(path: Path | None) -> RunConfig:
    '''Read a YAML run configuration; None gives the built-in defaults.'''
    raw = {} if path is None else _read_yaml(path, "YAML")
    return build_run_config(raw)



# ============ Scenario files ============

_SWEEPS = {"rho_grid": "rho", "z_grid": "z", "p_grid": "p"}


def _float_list(raw: Any, key: str) -> Tuple[float, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key} must be a nonempty list")
    try:
        return tuple(float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} holds a non-numeric entry") from exc


def scenario_from_mapping(raw: Dict[str, Any], default_name: str = "custom") -> ScenarioFamily:
    '''JSON/YAML scenario: n, p, beta0, beta, sigma, rho or one of
    rho_grid / z_grid / p_grid, replications. beta entries null or "z" are
    the z slots; under p_grid, beta lists the leading coefficients.'''
    missing = {"n", "beta", "sigma"} - raw.keys()
    if missing:
        raise ConfigError(f"missing scenario keys: {', '.join(sorted(missing))}")
    sweeps = [key for key in _SWEEPS if raw.get(key) is not None]
    if len(sweeps) > 1:
        raise ConfigError(f"at most one sweep may be given, got {', '.join(sweeps)}")
    sweep_key = sweeps[0] if sweeps else ""
    sweep_name = _SWEEPS.get(sweep_key, "")

    beta_raw = raw["beta"]
    if not isinstance(beta_raw, list) or not beta_raw:
        raise ConfigError("beta must be a nonempty list")
    z_slots = tuple(j for j, b in enumerate(beta_raw) if b is None or b == "z")
    if z_slots and sweep_name != "z":
        raise ConfigError("beta has z placeholders but no z_grid is given")
    try:
        beta = tuple(0.0 if j in z_slots else float(b) for j, b in enumerate(beta_raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError("beta entries must be numbers, null or \"z\"") from exc

    values = _float_list(raw[sweep_key], sweep_key) if sweep_key else ()
    leading: Tuple[float, ...] = ()
    if sweep_name == "p":
        leading = beta
        p = int(values[0])
        beta = leading + (0.0,) * max(p - len(leading), 0)
    else:
        p = int(raw.get("p", len(beta)))

    rho = values[0] if sweep_name == "rho" else float(raw.get("rho", 0.0))
    try:
        base = ScenarioSpec(
            n=int(raw["n"]),
            p=p,
            beta0=float(raw.get("beta0", 0.0)),
            beta=beta,
            rho=rho,
            sigma=float(raw["sigma"]),
            replications=int(raw.get("replications", config.DEFAULT_REPLICATIONS)),
        )
        return ScenarioFamily(
            name=str(raw.get("name", default_name)),
            description=str(raw.get("description", "scenario file")),
            base=base,
            sweep_name=sweep_name,
            sweep_values=values,
            z_slots=z_slots,
            leading=leading,
        )
    except (DataError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load_scenario(path: Path) -> ScenarioFamily:
    # yaml.safe_load reads JSON documents too
    return scenario_from_mapping(_read_yaml(path, "scenario"), default_name=path.stem)
