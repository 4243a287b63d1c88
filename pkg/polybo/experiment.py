"""
Benchmark Experiments
Replicated PMBO / BO_fixed runs over benchmark functions and kernel
hyper-parameter grids, the surrogate RMSE comparison, landscape sampling
and the aggregate statistics of a finished experiment.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .benchmarks import ObjectiveSpec, make_objective, surrogate_rmse
from .config import ExperimentConfig
from .errors import ObjectiveEvaluationError, OutputDirectoryError
from .gp import GpModel, KernelSpec, fit_gp, posterior_mean
from .interpolation import DomainTransform
from .pmbo import PMBO, run_bo_fixed, run_pmbo
from .regression import degree_for_sample_count, fit_samples

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "function_id",
    "dimension",
    "algorithm",
    "kernel",
    "l",
    "sigma2",
    "replicate",
    "seed",
    "final_best",
    "rmse",
    "n_final_degree",
    "wall_time_ms",
]
CURVE_COLUMNS = ["run_id", "iteration", "best_so_far"]
GROUPING_COLUMNS = ("function_id", "dimension", "algorithm", "kernel", "l", "sigma2")

RMSE_COMPARISON_GRID = 10_000


def replicate_seed(master_seed: int, replicate: int) -> int:
    """Seed of replicate r, shared by every grid cell and algorithm."""
    return int(np.random.SeedSequence([int(master_seed), int(replicate)]).generate_state(1)[0])


@dataclass(frozen=True)
class RunSpec:
    run_id: int
    function_id: int
    dimension: int
    algorithm: str
    kernel: KernelSpec
    replicate: int
    seed: int
    config: ExperimentConfig


@dataclass
class RunResult:
    spec: RunSpec
    final_best: Optional[float] = None
    rmse: Optional[float] = None
    n_final_degree: Optional[int] = None
    best_x: Optional[tuple] = None
    wall_time_ms: float = 0.0
    error: Optional[str] = None
    curve: np.ndarray = field(default_factory=lambda: np.empty(0))
    trace: Optional[pd.DataFrame] = None

    @property
    def failed(self):
        return self.error is not None

    def summary_row(self) -> dict:
        s = self.spec
        return {
            "function_id": s.function_id,
            "dimension": s.dimension,
            "algorithm": s.algorithm,
            "kernel": s.kernel.family.value,
            "l": s.kernel.length_scale,
            "sigma2": s.kernel.variance,
            "replicate": s.replicate,
            "seed": s.seed,
            "final_best": self.final_best,
            "rmse": self.rmse,
            "n_final_degree": self.n_final_degree,
            "wall_time_ms": self.wall_time_ms,
            "error": self.error,
        }


@dataclass
class ComparisonReport:
    config: Optional[ExperimentConfig] = None
    runs: List[RunResult] = field(default_factory=list)

    def __len__(self):
        return len(self.runs)

    @property
    def failed_runs(self):
        return [run for run in self.runs if run.failed]

    def summary_frame(self, include_error: bool = True) -> pd.DataFrame:
        columns = SUMMARY_COLUMNS + (["error"] if include_error else [])
        rows = [run.summary_row() for run in sorted(self.runs, key=lambda r: r.spec.run_id)]
        frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS + ["error"])
        frame["n_final_degree"] = frame["n_final_degree"].astype("Int64")
        return frame[columns]

    def curves_frame(self) -> pd.DataFrame:
        pieces = [
            pd.DataFrame(
                {
                    "run_id": run.spec.run_id,
                    "iteration": np.arange(run.curve.size),
                    "best_so_far": run.curve,
                }
            )
            for run in sorted(self.runs, key=lambda r: r.spec.run_id)
            if run.curve.size
        ]
        if not pieces:
            return pd.DataFrame(columns=CURVE_COLUMNS)
        return pd.concat(pieces, ignore_index=True)[CURVE_COLUMNS]

    def traces(self) -> Dict[int, pd.DataFrame]:
        return {run.spec.run_id: run.trace for run in self.runs if run.trace is not None}


def plan_runs(config: ExperimentConfig) -> List[RunSpec]:
    """Every (function, dimension, kernel, replicate, algorithm) run in a fixed order."""
    specs = []
    for function_id in config.functions:
        for m in config.dimensions:
            for kernel in config.kernels_for(m):
                for replicate in range(config.replicates):
                    seed = replicate_seed(config.seed, replicate)
                    for algorithm in config.algorithms:
                        specs.append(
                            RunSpec(
                                run_id=len(specs),
                                function_id=function_id,
                                dimension=m,
                                algorithm=algorithm,
                                kernel=kernel,
                                replicate=replicate,
                                seed=seed,
                                config=config,
                            )
                        )
    return specs


def _model_predictor(model, transform: DomainTransform):
    def predict(points):
        return posterior_mean(model, transform.forward(np.atleast_2d(points)))

    return predict


def execute_run(spec: RunSpec) -> RunResult:
    """One benchmark run; exceptions end up in the result's ``error``."""
    config = spec.config
    result = RunResult(spec=spec)
    started = time.perf_counter()
    trace = None
    try:
        objective = make_objective(spec.function_id, spec.dimension, shift_seed=spec.seed if config.shift else None)
        pmbo_config = config.pmbo_config(objective, spec.kernel, spec.seed)
        runner = run_pmbo if spec.algorithm == PMBO else run_bo_fixed
        trace = runner(objective, pmbo_config)

        if objective.call_count != pmbo_config.budget:
            raise RuntimeError(
                f"objective evaluated {objective.call_count} times for a budget of {pmbo_config.budget}"
            )
        if config.rmse_grid and trace.final_model is not None:
            predictor = _model_predictor(trace.final_model, pmbo_config.domain_transform)
            result.rmse = surrogate_rmse(predictor, objective, config.rmse_grid, [spec.seed, 1])
    except ObjectiveEvaluationError as exc:
        trace = exc.trace
        result.error = f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        result.error = f"{type(exc).__name__}: {exc}"

    if result.error:
        logger.error("run %d (%s, f%d, m=%d) failed: %s", spec.run_id, spec.algorithm,
                     spec.function_id, spec.dimension, result.error)
    if trace is not None and len(trace):
        result.final_best = float(trace.best_y)
        result.n_final_degree = trace.final_degree
        result.best_x = tuple(float(v) for v in trace.best_x)
        result.curve = trace.best_so_far_curve()
        result.trace = trace.to_frame()
    result.wall_time_ms = (time.perf_counter() - started) * 1000.0
    return result


def _prepare_output(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputDirectoryError(f"cannot write to output directory {out}: {exc}") from exc
    return out


def run_experiment(config: ExperimentConfig, write: bool = True, progress=None) -> ComparisonReport:
    """
    Run the whole grid (in a process pool when ``config.jobs`` > 1). With
    ``write`` the summary, curves and per-run traces go to ``config.output``.
    ``progress`` is called with each finished RunResult.
    """
    if write:
        _prepare_output(config.output)
    specs = plan_runs(config)
    logger.info("running %d benchmark runs with %d worker(s)", len(specs), config.jobs)

    report = ComparisonReport(config=config)
    if config.jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for result in pool.map(execute_run, specs):
                report.runs.append(result)
                if progress:
                    progress(result)
    else:
        for spec in specs:
            result = execute_run(spec)
            report.runs.append(result)
            if progress:
                progress(result)

    if write:
        from .exporter import emit_report

        emit_report(report, config.format, config.output)
    return report


def _summary_of(report) -> pd.DataFrame:
    if isinstance(report, ComparisonReport):
        return report.summary_frame()
    return report


def aggregate(report, by: Sequence[str] = ("function_id", "dimension", "algorithm")) -> pd.DataFrame:
    """Median, quartiles and IQR of final_best per group (failed runs excluded)."""
    summary = _summary_of(report)
    by = list(by)
    unknown = [c for c in by if c not in GROUPING_COLUMNS]
    if unknown:
        raise ValueError(f"cannot group by {unknown}; choose from {list(GROUPING_COLUMNS)}")
    columns = by + ["runs", "median", "q1", "q3", "iqr"]
    valid = summary.dropna(subset=["final_best"])
    if valid.empty:
        return pd.DataFrame(columns=columns)

    grouped = valid.groupby(by, sort=True)["final_best"]
    table = grouped.agg(
        runs="count",
        median="median",
        q1=lambda s: s.quantile(0.25),
        q3=lambda s: s.quantile(0.75),
    ).reset_index()
    table["iqr"] = table["q3"] - table["q1"]
    return table[columns]


def convergence_summary(report, curves: Optional[pd.DataFrame] = None) -> pd.DataFrame:
    """Median and quartiles of best-so-far per (function, dimension, algorithm, iteration)."""
    if isinstance(report, ComparisonReport):
        summary, curves = report.summary_frame(), report.curves_frame()
    else:
        summary = report
    keys = ["function_id", "dimension", "algorithm", "iteration"]
    columns = keys + ["median", "q1", "q3"]
    if curves is None or curves.empty:
        return pd.DataFrame(columns=columns)

    runs = summary.reset_index(drop=True).rename_axis("run_id").reset_index()
    merged = curves.merge(runs[["run_id", "function_id", "dimension", "algorithm"]], on="run_id")
    grouped = merged.groupby(keys, sort=True)["best_so_far"]
    table = grouped.agg(
        median="median",
        q1=lambda s: s.quantile(0.25),
        q3=lambda s: s.quantile(0.75),
    ).reset_index()
    return table[columns]


@dataclass
class FittedSurrogates:
    objective: ObjectiveSpec
    transform: DomainTransform
    degree: int
    pmbo_model: GpModel
    bo_model: GpModel
    samples: np.ndarray
    values: np.ndarray


def fit_surrogates(function_id, m, n_samples=50, kernel: Optional[KernelSpec] = None, seed=0,
                   p=2.0, shift=False) -> FittedSurrogates:
    """Fit the PMBO (polynomial prior mean) and zero-mean GP surrogates on the same uniform samples."""
    kernel = kernel or KernelSpec()
    objective = make_objective(function_id, m, shift_seed=seed if shift else None)
    transform = DomainTransform(objective.lower, objective.upper)
    rng = np.random.default_rng(seed)
    samples = rng.uniform(objective.lower, objective.upper, size=(n_samples, m))
    values = objective.evaluate_batch(samples)
    cube = transform.forward(samples)

    degree = degree_for_sample_count(m, p, n_samples)
    polynomial = fit_samples(cube, values, degree, m, p)
    return FittedSurrogates(
        objective=objective,
        transform=transform,
        degree=degree,
        pmbo_model=fit_gp(cube, values, polynomial, kernel),
        bo_model=fit_gp(cube, values, None, kernel),
        samples=samples,
        values=values,
    )


def surrogate_comparison(function_id, m, n_samples=50, kernel: Optional[KernelSpec] = None, seed=0,
                         grid_size=RMSE_COMPARISON_GRID, p=2.0, shift=False) -> dict:
    """RMSE of both surrogates on a fresh uniform test grid."""
    kernel = kernel or KernelSpec()
    fitted = fit_surrogates(function_id, m, n_samples, kernel, seed, p, shift)
    test_seed = [int(seed), 1]
    rmse_pmbo = surrogate_rmse(_model_predictor(fitted.pmbo_model, fitted.transform),
                               fitted.objective, grid_size, test_seed)
    rmse_bo = surrogate_rmse(_model_predictor(fitted.bo_model, fitted.transform),
                             fitted.objective, grid_size, test_seed)
    return {
        "function_id": fitted.objective.function_id,
        "function": fitted.objective.name,
        "dimension": m,
        "n_samples": n_samples,
        "degree": fitted.degree,
        "kernel": kernel.family.value,
        "l": kernel.length_scale,
        "sigma2": kernel.variance,
        "seed": seed,
        "rmse_pmbo": rmse_pmbo,
        "rmse_bo": rmse_bo,
    }


def landscape_grid(function_id, n_samples=50, kernel: Optional[KernelSpec] = None, seed=0,
                   resolution=50, p=2.0) -> pd.DataFrame:
    """Truth and both surrogate means on a resolution x resolution lattice (m = 2 only)."""
    fitted = fit_surrogates(function_id, 2, n_samples, kernel, seed, p)
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(fitted.objective.lower, fitted.objective.upper)]
    x0, x1 = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([x0.ravel(), x1.ravel()])
    cube = fitted.transform.forward(points)
    return pd.DataFrame(
        {
            "x0": points[:, 0],
            "x1": points[:, 1],
            "truth": fitted.objective.evaluate_batch(points),
            "pmbo_mean": posterior_mean(fitted.pmbo_model, cube),
            "bo_mean": posterior_mean(fitted.bo_model, cube),
        }
    )
