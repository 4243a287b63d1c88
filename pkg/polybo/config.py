"""
Experiment Configuration
Declarative experiment settings: built-in defaults, overridden by a TOML
file, then by POLYBO_* environment variables, then by command-line flags.
"""

from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from .acquisition import AcquisitionFamily, AcquisitionSpec
from .benchmarks import CATALOGUE
from .errors import ConfigurationError
from .gp import KernelFamily, KernelSpec
from .pmbo import BO_FIXED, PMBO, PmboConfig, SamplingStrategy

logger = logging.getLogger(__name__)

STANDARD_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 500.0, 1000.0)
STANDARD_GRID_HIGH_DIMENSION = (1e-3, 1.0, 1000.0)
# dimensions from here on use the reduced hyper-parameter grid
HIGH_DIMENSION = 5

ALGORITHMS = (PMBO, BO_FIXED)
FORMATS = ("csv", "jsonl", "xlsx")
DEFAULT_RMSE_GRID = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    functions: Tuple[int, ...] = (1,)
    dimensions: Tuple[int, ...] = (2,)
    algorithms: Tuple[str, ...] = ALGORITHMS
    kernel_families: Tuple[KernelFamily, ...] = (KernelFamily.MATERN32,)
    ranges: Tuple[float, ...] = (1.0,)
    variances: Tuple[float, ...] = (1.0,)
    # "standard" replaces ranges/variances by the per-dimension hyper-parameter grid;
    # "explicit" (or unset) uses them as given
    kernel_grid: Optional[str] = None
    replicates: int = 5
    budget_per_dimension: int = 100
    budget: Optional[int] = None
    seed: int = 0
    output: str = "results"
    format: str = "csv"
    jobs: int = 1
    shift: bool = False
    rmse_grid: int = DEFAULT_RMSE_GRID
    initial_degree: int = 2
    degree_norm: float = 2.0
    sampling: SamplingStrategy = SamplingStrategy.SOBOL
    initial_samples: Optional[int] = None
    max_degree: int = 30
    uninverted_trend_variance: bool = False
    acquisition_family: AcquisitionFamily = AcquisitionFamily.EXPECTED_IMPROVEMENT
    ucb_beta: float = 2.0
    candidates_per_dimension: int = 1000
    refine: bool = True

    def __post_init__(self):
        try:
            object.__setattr__(self, "functions", tuple(int(f) for f in self.functions))
            object.__setattr__(self, "dimensions", tuple(int(m) for m in self.dimensions))
            object.__setattr__(self, "ranges", tuple(float(v) for v in self.ranges))
            object.__setattr__(self, "variances", tuple(float(v) for v in self.variances))
            object.__setattr__(self, "kernel_families", tuple(KernelFamily.parse(k) for k in self.kernel_families))
            object.__setattr__(self, "acquisition_family", AcquisitionFamily.parse(self.acquisition_family))
            object.__setattr__(self, "sampling", SamplingStrategy.parse(self.sampling))
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from exc
        object.__setattr__(self, "algorithms", tuple(str(a).lower() for a in self.algorithms))

        unknown = [f for f in self.functions if f not in CATALOGUE]
        if unknown:
            raise ConfigurationError(f"unknown benchmark ids {unknown}; choose from {sorted(CATALOGUE)}")
        if not self.functions or not self.dimensions or not self.algorithms:
            raise ConfigurationError("functions, dimensions and algorithms must all be non-empty")
        if any(m < 1 for m in self.dimensions):
            raise ConfigurationError(f"dimensions must be positive, got {self.dimensions}")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigurationError(f"unknown algorithms {bad}; choose from {list(ALGORITHMS)}")
        if self.replicates < 1:
            raise ConfigurationError(f"replicates must be at least 1, got {self.replicates}")
        if any(v <= 0 for v in self.ranges + self.variances):
            raise ConfigurationError("kernel ranges and variances must be positive")
        if self.kernel_grid not in (None, "standard", "explicit"):
            raise ConfigurationError(f"kernel grid must be 'standard' or 'explicit', got {self.kernel_grid!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"output format must be one of {FORMATS}, got {self.format!r}")
        if self.budget is not None and self.budget < 1:
            raise ConfigurationError(f"budget must be positive, got {self.budget}")
        if self.budget_per_dimension < 1 or self.jobs < 1 or self.rmse_grid < 0:
            raise ConfigurationError("budget_per_dimension and jobs must be positive, rmse_grid non-negative")

    def budget_for(self, m: int) -> int:
        return self.budget if self.budget is not None else self.budget_per_dimension * m

    def hyperparameter_grid(self, m: int):
        if self.kernel_grid == "standard":
            values = STANDARD_GRID_HIGH_DIMENSION if m >= HIGH_DIMENSION else STANDARD_GRID
            return values, values
        return self.ranges, self.variances

    def kernels_for(self, m: int):
        """Every (family, l, sigma^2) combination run in dimension m."""
        ranges, variances = self.hyperparameter_grid(m)
        return [
            KernelSpec(family, length_scale, variance)
            for family in self.kernel_families
            for length_scale in ranges
            for variance in variances
        ]

    def acquisition_spec(self, m: int) -> AcquisitionSpec:
        return AcquisitionSpec(
            family=self.acquisition_family,
            ucb_beta=self.ucb_beta,
            candidate_count=self.candidates_per_dimension * m,
            refine=self.refine,
        )

    def pmbo_config(self, objective, kernel: KernelSpec, seed: int) -> PmboConfig:
        m = objective.dimension
        return PmboConfig.for_objective(
            objective,
            initial_degree=self.initial_degree,
            degree_norm=self.degree_norm,
            initial_sample_count=self.initial_samples,
            budget=self.budget_for(m),
            sampling=self.sampling,
            kernel=kernel,
            acquisition=self.acquisition_spec(m),
            seed=seed,
            max_degree=self.max_degree,
            uninverted_trend_variance=self.uninverted_trend_variance,
        )


def _as_tuple(value):
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


# TOML key -> ExperimentConfig field, per table
TOP_LEVEL_KEYS = {
    "functions": "functions",
    "dimensions": "dimensions",
    "algorithms": "algorithms",
    "replicates": "replicates",
    "budget_per_dimension": "budget_per_dimension",
    "budget": "budget",
    "seed": "seed",
    "output": "output",
    "format": "format",
    "jobs": "jobs",
    "shift": "shift",
    "rmse_grid": "rmse_grid",
}
KERNEL_KEYS = {"families": "kernel_families", "ranges": "ranges", "variances": "variances", "grid": "kernel_grid"}
PMBO_KEYS = {
    "initial_degree": "initial_degree",
    "degree_norm": "degree_norm",
    "sampling": "sampling",
    "initial_samples": "initial_samples",
    "max_degree": "max_degree",
    "uninverted_trend_variance": "uninverted_trend_variance",
}
ACQUISITION_KEYS = {
    "family": "acquisition_family",
    "ucb_beta": "ucb_beta",
    "candidates_per_dimension": "candidates_per_dimension",
    "refine": "refine",
}
TUPLE_FIELDS = {"functions", "dimensions", "algorithms", "kernel_families", "ranges", "variances"}


def _parse_norm(value):
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return float("inf")
    return float(value)


def _read_table(table: Mapping, keys: Mapping[str, str], where: str) -> dict:
    values = {}
    for key, value in table.items():
        if key not in keys:
            raise ConfigurationError(f"unknown key {key!r} in {where}")
        name = keys[key]
        values[name] = _as_tuple(value) if name in TUPLE_FIELDS else value
    return values


def read_config_file(path) -> dict:
    """Flatten a TOML experiment file into ExperimentConfig keyword arguments."""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            document = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"invalid TOML in {path}: {exc}") from exc

    tables = {"kernel": KERNEL_KEYS, "pmbo": PMBO_KEYS, "acquisition": ACQUISITION_KEYS}
    values = {}
    for key, value in document.items():
        if key in tables:
            if not isinstance(value, dict):
                raise ConfigurationError(f"[{key}] must be a table in {path}")
            values.update(_read_table(value, tables[key], f"[{key}]"))
        elif key in TOP_LEVEL_KEYS:
            name = TOP_LEVEL_KEYS[key]
            values[name] = _as_tuple(value) if name in TUPLE_FIELDS else value
        else:
            raise ConfigurationError(f"unknown key {key!r} in {path}")
    if "degree_norm" in values:
        values["degree_norm"] = _parse_norm(values["degree_norm"])
    return values


def environment_overrides(env: Optional[Mapping[str, str]] = None) -> dict:
    """POLYBO_JOBS, POLYBO_OUTPUT_DIR and POLYBO_RMSE_GRID; bad integers fall back to the defaults."""
    env = os.environ if env is None else env
    values = {}

    if "POLYBO_JOBS" in env:
        try:
            jobs = int(env["POLYBO_JOBS"])
        except ValueError:
            jobs = 1
        values["jobs"] = max(1, min(jobs, os.cpu_count() or 1))

    if env.get("POLYBO_OUTPUT_DIR"):
        values["output"] = env["POLYBO_OUTPUT_DIR"]

    if "POLYBO_RMSE_GRID" in env:
        try:
            grid = int(env["POLYBO_RMSE_GRID"])
        except ValueError:
            grid = DEFAULT_RMSE_GRID
        values["rmse_grid"] = max(0, grid)

    return values


def load_config(
    path=None,
    overrides: Optional[Mapping] = None,
    env: Optional[Mapping[str, str]] = None,
    defaults: Optional[Mapping] = None,
) -> ExperimentConfig:
    """
    Built-in defaults < ``defaults`` < TOML file < environment < explicit
    ``overrides`` (None values are ignored).
    """
    values = dict(defaults or {})
    if path is not None:
        values.update(read_config_file(path))
        logger.info("loaded experiment config from %s", path)
    values.update(environment_overrides(env))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown configuration fields {sorted(unknown)}")
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
