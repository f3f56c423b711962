'''
Synthetic data from the Gaussian linear model

    y_i = beta0 + beta' x_i + eps_i,   x_i ~ N(0, Sigma),  Sigma_jk = rho^|j-k|,

plus the built-in scenario families of the benchmark.

Every replication draws from its own PCG64 stream seeded by
SeedSequence([base_seed, replication]), so a run is a pure function of the
scenario list and the base seed and replications can be generated in any
order or in parallel.
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from . import config
from .core import Dataset, ShapeError

logger = logging.getLogger(__name__)

GENERATOR_NAME = "numpy.random.PCG64 via SeedSequence([base_seed, replication])"
SIGMA_FLOOR = 1e-12

RHO_GRID: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)
Z_GRID: Tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(16))
P_GRID: Tuple[int, ...] = (100, 150, 200, 250, 300)

CASE_BETA: Tuple[float, ...] = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
CASE_BETA0 = 4.0



# ===================== Seeds and generators =====================

@dataclass(frozen=True)
class ReplicationSeed:
    base_seed: int
    replication_index: int

    def __post_init__(self) -> None:
        if self.base_seed < 0 or self.replication_index < 0:
            raise ValueError(f"seed components must be nonnegative, got {self.base_seed}, {self.replication_index}")

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.base_seed, self.replication_index])

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))

    def derived_seed(self, stream: int = 0) -> int:
        '''Integer seed for a consumer that wants its own stream (CV folds).'''
        child = np.random.SeedSequence([self.base_seed, self.replication_index, 1, stream])
        return int(child.generate_state(1, dtype=np.uint32)[0])


def _rng(seed: ReplicationSeed | np.random.Generator | int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, ReplicationSeed):
        return seed.generator()
    return np.random.Generator(np.random.PCG64(seed))


def gen_ar1_predictors(
    n: int,
    p: int,
    rho: float,
    seed: ReplicationSeed | np.random.Generator | int,
) -> np.ndarray:
    '''Rows i.i.d. N(0, Sigma) with Sigma_jk = rho^|j-k|, built column by
    column: x_1 = z_1, x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j.'''
    if not abs(rho) < 1.0:
        raise ValueError(f"AR(1) correlation needs |rho| < 1, got {rho}")
    if n < 1 or p < 1:
        raise ShapeError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    z = _rng(seed).standard_normal((n, p))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    innovation = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + innovation * z[:, j]
    return x



# ===================== Scenarios =====================

@dataclass(frozen=True)
class ScenarioSpec:
    n: int
    p: int
    beta0: float
    beta: Tuple[float, ...]
    rho: float
    sigma: float
    replications: int = config.DEFAULT_REPLICATIONS
    base_seed: int = config.DEFAULT_SEED

    def __post_init__(self) -> None:
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        if len(beta) != self.p:
            raise ShapeError(f"beta has {len(beta)} entries, p={self.p}")
        if self.n < 2 or self.p < 1:
            raise ShapeError(f"need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"rho must satisfy |rho| < 1, got {self.rho}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")

    @property
    def beta_array(self) -> np.ndarray:
        return np.array(self.beta)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_array)

    def seed(self, r: int) -> ReplicationSeed:
        return ReplicationSeed(self.base_seed, r)


def gen_dataset(spec: ScenarioSpec, r: int) -> Dataset:
    '''Replication r of a scenario; predictors first, then the noise, from
    one stream.'''
    rng = spec.seed(r).generator()
    x = gen_ar1_predictors(spec.n, spec.p, spec.rho, rng)
    eps = rng.standard_normal(spec.n) * max(spec.sigma, SIGMA_FLOOR)
    y = spec.beta0 + x @ spec.beta_array + eps
    return Dataset(x, y)


@dataclass(frozen=True)
class ScenarioFamily:
    '''A base scenario and the one parameter swept across it.'''
    name: str
    description: str
    base: ScenarioSpec
    sweep_name: str = ""             # "rho", "z", "p" or "" for a single point
    sweep_values: Tuple[float, ...] = ()
    z_slots: Tuple[int, ...] = ()    # beta positions filled with z
    leading: Tuple[float, ...] = field(default=())  # p sweep: nonzero head of beta

    def __post_init__(self) -> None:
        if self.sweep_name not in ("", "rho", "z", "p"):
            raise ValueError(f"unknown sweep parameter: {self.sweep_name!r}")
        if self.sweep_name and not self.sweep_values:
            raise ValueError(f"scenario {self.name!r} sweeps {self.sweep_name} over no values")
        if self.sweep_name == "z" and not self.z_slots:
            raise ValueError(f"scenario {self.name!r} sweeps z but has no z positions")

    def points(self) -> Tuple[float, ...]:
        return self.sweep_values if self.sweep_name else (float("nan"),)

    def spec_at(self, value: float) -> ScenarioSpec:
        if self.sweep_name == "rho":
            return replace(self.base, rho=float(value))
        if self.sweep_name == "z":
            beta = list(self.base.beta)
            for j in self.z_slots:
                beta[j] = float(value)
            return replace(self.base, beta=tuple(beta))
        if self.sweep_name == "p":
            p = int(value)
            if p < len(self.leading):
                raise ShapeError(f"p={p} is shorter than the {len(self.leading)} leading coefficients")
            beta = tuple(self.leading) + (0.0,) * (p - len(self.leading))
            return replace(self.base, p=p, beta=beta)
        return self.base

    def with_overrides(self, replications: int | None = None, base_seed: int | None = None) -> ScenarioFamily:
        changes: Dict[str, Any] = {}
        if replications is not None:
            changes["replications"] = int(replications)
        if base_seed is not None:
            changes["base_seed"] = int(base_seed)
        if not changes:
            return self
        return replace(self, base=replace(self.base, **changes))

    def describe(self) -> Dict[str, Any]:
        b = self.base
        return {
            "name": self.name,
            "description": self.description,
            "n": b.n,
            "p": b.p,
            "beta0": b.beta0,
            "sigma": b.sigma,
            "rho": b.rho,
            "sweep": self.sweep_name or None,
            "values": list(self.sweep_values),
            "replications": b.replications,
        }


def _case(name: str, n: int, sigma: float) -> ScenarioFamily:
    return ScenarioFamily(
        name=name,
        description=f"correlation sweep, n={n}, p=8, sigma={sigma:g}",
        base=ScenarioSpec(n=n, p=8, beta0=CASE_BETA0, beta=CASE_BETA, rho=0.0, sigma=sigma),
        sweep_name="rho",
        sweep_values=RHO_GRID,
    )


def builtin_scenarios() -> List[ScenarioFamily]:
    # nearly sparse: (3, 1.5, z, z, 2, z, z, z); z = 0 gives the case pattern
    z_slots = (2, 3, 5, 6, 7)
    nearly = ScenarioFamily(
        name="nearsparse",
        description="nearly-sparse sweep over z, n=40, p=8, sigma=1, rho=0.5",
        base=ScenarioSpec(n=40, p=8, beta0=CASE_BETA0, beta=CASE_BETA, rho=0.5, sigma=1.0),
        sweep_name="z",
        sweep_values=Z_GRID,
        z_slots=z_slots,
    )
    leading = (1.0,) * 10
    dimension = ScenarioFamily(
        name="dimsweep",
        description="dimension sweep over p, n=1000, sigma=1, rho=0.5, ten unit coefficients",
        base=ScenarioSpec(n=1000, p=P_GRID[0], beta0=0.0, beta=leading + (0.0,) * (P_GRID[0] - 10), rho=0.5, sigma=1.0),
        sweep_name="p",
        sweep_values=tuple(float(p) for p in P_GRID),
        leading=leading,
    )
    timing = ScenarioFamily(
        name="timing",
        description="timing study, n=1000, p=100, rho=0.5",
        base=ScenarioSpec(n=1000, p=100, beta0=0.0, beta=leading + (0.0,) * 90, rho=0.5, sigma=1.0),
    )
    return [
        _case("case1", 40, 1.0),
        _case("case2", 40, 3.0),
        _case("case3", 100, 1.0),
        nearly,
        dimension,
        timing,
    ]


def find_scenario(name: str, families: Sequence[ScenarioFamily] | None = None) -> ScenarioFamily:
    families = builtin_scenarios() if families is None else families
    for family in families:
        if family.name == name:
            return family
    known = ", ".join(f.name for f in families)
    raise ValueError(f"unknown scenario {name!r}; built-in scenarios: {known}")
