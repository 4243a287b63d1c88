"""
Polynomial-Mean Bayesian Optimization
The optimizer loop: initial design, min-max transform onto [-1, 1]^m,
polynomial regression with degree updates as the GP prior mean, and
acquisition-driven proposals. ``run_bo_fixed`` is the same loop with a
zero prior mean and no polynomial stages.
"""

from __future__ import annotations

import enum
import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.stats import qmc

from .acquisition import AcquisitionSpec, propose_next
from .benchmarks import ObjectiveSpec
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    FactorizationError,
    ObjectiveEvaluationError,
    OutOfBoundsError,
    RankDeficientError,
    UnderdeterminedError,
)
from .gp import GpModel, KernelSpec, fit_gp
from .interpolation import DomainTransform, leja_chebyshev_nodes, unisolvent_grid
from .multiindex import build_multi_index_set, cached_cardinality
from .regression import fit_samples, should_increase_degree

logger = logging.getLogger(__name__)

PMBO = "pmbo"
BO_FIXED = "bo_fixed"


class SamplingStrategy(str, enum.Enum):
    SIMPLE_RANDOM = "SimpleRandom"
    SOBOL = "Sobol"
    LCL = "LCL"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        for member in cls:
            if member.value.lower() == key or member.name.replace("_", "").lower() == key:
                return member
        if key == "random":
            return cls.SIMPLE_RANDOM
        raise ConfigurationError(f"unknown sampling strategy {name!r}")


@dataclass(frozen=True)
class PmboConfig:
    """
    Settings of one optimization run. ``initial_sample_count`` defaults to
    2 * |A_{m,n0,p}| and ``budget`` to 100 * m.
    """

    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    initial_degree: int = 2
    degree_norm: float = 2.0
    initial_sample_count: Optional[int] = None
    budget: Optional[int] = None
    sampling: SamplingStrategy = SamplingStrategy.SOBOL
    kernel: KernelSpec = field(default_factory=KernelSpec)
    acquisition: AcquisitionSpec = field(default_factory=AcquisitionSpec)
    log_transform: Optional[np.ndarray] = None
    seed: int = 0
    max_degree: int = 30
    uninverted_trend_variance: bool = False
    duplicate_tolerance: float = 1e-9
    jitter_radius: float = 1e-3

    def __post_init__(self):
        m = self.dimension
        if int(m) != m or m < 1:
            raise ConfigurationError(f"dimension must be a positive integer, got {m}")
        object.__setattr__(self, "sampling", SamplingStrategy.parse(self.sampling))
        if self.initial_degree < 0 or self.max_degree < self.initial_degree:
            raise ConfigurationError(
                f"need 0 <= initial_degree <= max_degree, got {self.initial_degree} and {self.max_degree}"
            )
        try:
            transform = DomainTransform(self.lower, self.upper, self.log_transform)
        except (OutOfBoundsError, DimensionMismatchError) as exc:
            raise ConfigurationError(str(exc)) from exc
        if transform.dimension != m:
            raise ConfigurationError(f"bounds have length {transform.dimension} for dimension {m}")
        object.__setattr__(self, "lower", transform.lower)
        object.__setattr__(self, "upper", transform.upper)
        object.__setattr__(self, "log_transform", transform.log_scale)

        coefficients = cached_cardinality(m, self.initial_degree, float(self.degree_norm))
        n0 = self.initial_sample_count if self.initial_sample_count is not None else 2 * coefficients
        budget = self.budget if self.budget is not None else 100 * m
        if n0 <= coefficients:
            raise ConfigurationError(
                f"initial sample count {n0} must exceed |A_{{{m},{self.initial_degree},{self.degree_norm}}}| = {coefficients}"
            )
        if n0 > budget:
            raise ConfigurationError(f"initial sample count {n0} exceeds the evaluation budget {budget}")
        object.__setattr__(self, "initial_sample_count", int(n0))
        object.__setattr__(self, "budget", int(budget))

    @classmethod
    def for_objective(cls, objective: ObjectiveSpec, **overrides):
        lower, upper = objective.bounds
        return cls(dimension=objective.dimension, lower=lower, upper=upper, **overrides)

    @property
    def domain_transform(self) -> DomainTransform:
        return DomainTransform(self.lower, self.upper, self.log_transform)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    phase: str
    point: tuple
    value: float
    best_so_far: float
    degree: Optional[int]
    degree_increased: bool = False
    rank_deficient: bool = False
    duplicate_jittered: bool = False
    factorization_failed: bool = False
    wall_time_s: float = 0.0


@dataclass
class OptimizationTrace:
    algorithm: str
    dimension: int
    seed: int
    records: List[IterationRecord] = field(default_factory=list)
    optimum_value: Optional[float] = None
    final_model: Optional[GpModel] = None

    def __len__(self):
        return len(self.records)

    def append(self, record: IterationRecord):
        self.records.append(record)

    @property
    def best_record(self):
        if not self.records:
            return None
        return min(self.records, key=lambda r: r.value)

    @property
    def best_x(self):
        record = self.best_record
        return None if record is None else np.array(record.point)

    @property
    def best_y(self):
        return None if not self.records else self.records[-1].best_so_far

    @property
    def regret(self):
        if self.optimum_value is None or not self.records:
            return None
        return self.best_y - self.optimum_value

    @property
    def final_degree(self):
        return None if not self.records else self.records[-1].degree

    @property
    def degree_increase_iterations(self):
        return [r.iteration for r in self.records if r.degree_increased]

    def best_so_far_curve(self) -> np.ndarray:
        return np.array([r.best_so_far for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            row = {"iteration": r.iteration, "phase": r.phase}
            row.update({f"x{d}": v for d, v in enumerate(r.point)})
            row.update(
                {
                    "value": r.value,
                    "best_so_far": r.best_so_far,
                    "degree": r.degree,
                    "degree_increased": r.degree_increased,
                    "rank_deficient": r.rank_deficient,
                    "duplicate_jittered": r.duplicate_jittered,
                    "factorization_failed": r.factorization_failed,
                    "wall_time_s": r.wall_time_s,
                }
            )
            rows.append(row)
        columns = (
            ["iteration", "phase"]
            + [f"x{d}" for d in range(self.dimension)]
            + ["value", "best_so_far", "degree", "degree_increased", "rank_deficient",
               "duplicate_jittered", "factorization_failed", "wall_time_s"]
        )
        return pd.DataFrame(rows, columns=columns)


def min_max_transform(x_o, lower, upper, log_flags=None) -> np.ndarray:
    """Box [lb, ub] -> [-1, 1]^m, per dimension, optionally in log10 space."""
    return DomainTransform(lower, upper, log_flags).forward(x_o)


def inverse_min_max_transform(x, lower, upper, log_flags=None) -> np.ndarray:
    return DomainTransform(lower, upper, log_flags).inverse(x)


def initial_design(strategy, n_samples: int, m: int, seed) -> np.ndarray:
    """N0 starting points in [-1, 1]^m."""
    strategy = SamplingStrategy.parse(strategy)
    if n_samples < 1:
        raise ConfigurationError(f"initial design needs at least one point, got {n_samples}")

    if strategy is SamplingStrategy.SIMPLE_RANDOM:
        return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n_samples, m))

    if strategy is SamplingStrategy.SOBOL:
        with warnings.catch_warnings():
            # balance warning for sample counts that are not powers of two
            warnings.simplefilter("ignore", UserWarning)
            sampler = qmc.Sobol(d=m, scramble=True, seed=np.random.default_rng(seed))
            unit = sampler.random(n_samples)
        return qmc.scale(unit, -np.ones(m), np.ones(m))

    n_grid = 0
    while (n_grid + 1) ** m < n_samples:
        n_grid += 1
    grid = unisolvent_grid(build_multi_index_set(m, n_grid, np.inf), leja_chebyshev_nodes(n_grid))
    return grid.points[:n_samples].copy()


def _evaluate(objective, x, trace):
    try:
        return float(objective(x))
    except Exception as exc:
        raise ObjectiveEvaluationError(
            f"objective failed at iteration {len(trace)}: {exc}", trace=trace
        ) from exc


def _guard_duplicate(proposal, cube_points, config, rng_seed):
    distance = np.max(np.abs(cube_points - proposal), axis=1).min()
    if distance >= config.duplicate_tolerance:
        return proposal, False
    rng = np.random.default_rng(rng_seed)
    jitter = rng.uniform(-config.jitter_radius, config.jitter_radius, size=proposal.size)
    logger.info("proposal duplicates an existing sample; jittering by up to %.0e", config.jitter_radius)
    return np.clip(proposal + jitter, -1.0, 1.0), True


def _run(objective, config: PmboConfig, use_polynomial: bool) -> OptimizationTrace:
    algorithm = PMBO if use_polynomial else BO_FIXED
    transform = config.domain_transform
    m, p = config.dimension, float(config.degree_norm)
    trace = OptimizationTrace(
        algorithm=algorithm,
        dimension=m,
        seed=config.seed,
        optimum_value=getattr(objective, "optimum_value", None),
    )

    degree = config.initial_degree if use_polynomial else None
    points, values = [], []
    best = np.inf

    for z in initial_design(config.sampling, config.initial_sample_count, m, config.seed):
        started = time.perf_counter()
        x = transform.inverse(z)
        y = _evaluate(objective, x, trace)
        points.append(x)
        values.append(y)
        best = min(best, y)
        trace.append(
            IterationRecord(
                iteration=len(trace),
                phase="initial",
                point=tuple(float(v) for v in x),
                value=y,
                best_so_far=best,
                degree=degree,
                wall_time_s=time.perf_counter() - started,
            )
        )

    previous_surrogate = None
    while len(values) < config.budget:
        iteration = len(values)
        started = time.perf_counter()
        cube = transform.forward(np.array(points))
        observed = np.array(values)
        increased = rank_deficient = factorization_failed = False

        mean_model = None
        if use_polynomial:
            if degree < config.max_degree and should_increase_degree(degree, m, p, iteration):
                degree += 1
                increased = True
                logger.info("iteration %d: raising polynomial degree to %d", iteration, degree)
            try:
                previous_surrogate = fit_samples(cube, observed, degree, m, p)
            except (RankDeficientError, UnderdeterminedError) as exc:
                rank_deficient = True
                if increased:
                    degree -= 1
                    increased = False
                logger.warning("iteration %d: %s; reusing previous surrogate at degree %d", iteration, exc, degree)
            mean_model = previous_surrogate

        try:
            model = fit_gp(cube, observed, mean_model, config.kernel, config.uninverted_trend_variance)
            trace.final_model = model
            proposal = propose_next(model, config.acquisition, [config.seed, iteration])
        except FactorizationError as exc:
            factorization_failed = True
            logger.warning("iteration %d: %s; proposing a random point", iteration, exc)
            proposal = np.random.default_rng([config.seed, iteration]).uniform(-1.0, 1.0, size=m)

        proposal, jittered = _guard_duplicate(proposal, cube, config, [config.seed, iteration, 1])
        x = transform.inverse(proposal)
        y = _evaluate(objective, x, trace)
        points.append(x)
        values.append(y)
        best = min(best, y)

        trace.append(
            IterationRecord(
                iteration=iteration,
                phase="acquisition",
                point=tuple(float(v) for v in x),
                value=y,
                best_so_far=best,
                degree=degree,
                degree_increased=increased,
                rank_deficient=rank_deficient,
                duplicate_jittered=jittered,
                factorization_failed=factorization_failed,
                wall_time_s=time.perf_counter() - started,
            )
        )
        logger.debug("%s iteration %d: f=%.6g best=%.6g degree=%s", algorithm, iteration, y, best, degree)

    return trace


def run_pmbo(objective, config: PmboConfig) -> OptimizationTrace:
    """Minimize ``objective`` with the polynomial surrogate as GP prior mean."""
    return _run(objective, config, use_polynomial=True)


def run_bo_fixed(objective, config: PmboConfig) -> OptimizationTrace:
    """Zero-mean GP baseline with fixed hyper-parameters; same initial design as run_pmbo."""
    return _run(objective, config, use_polynomial=False)
