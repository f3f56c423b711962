from __future__ import annotations

import numpy as np
import pytest

from penalized.core import Dataset, StandardizedDesign, standardize
from penalized.simulator import CASE_BETA, CASE_BETA0, ScenarioSpec, gen_dataset


def orthogonal_dataset(n: int, p: int, beta, sigma: float, seed: int) -> Dataset:
    '''Centered columns with X'X = n I exactly (up to rounding).'''
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, p))
    raw -= raw.mean(axis=0)
    q, _ = np.linalg.qr(raw)
    x = q * np.sqrt(n)
    y = x @ np.asarray(beta, dtype=float) + sigma * rng.standard_normal(n)
    return Dataset(x, y)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def case_spec() -> ScenarioSpec:
    return ScenarioSpec(n=40, p=8, beta0=CASE_BETA0, beta=CASE_BETA, rho=0.5, sigma=1.0, replications=10, base_seed=3)


@pytest.fixture
def case_data(case_spec) -> Dataset:
    return gen_dataset(case_spec, 0)


@pytest.fixture
def case_design(case_data) -> StandardizedDesign:
    return standardize(case_data)


@pytest.fixture
def orthogonal_design() -> StandardizedDesign:
    return standardize(orthogonal_dataset(50, 5, (2.0, -1.0, 0.5, 0.0, 0.0), 0.5, seed=11))
