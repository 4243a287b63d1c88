"""
PolyBO Benchmark Harness - Command Line
Runs PMBO and BO_fixed on the benchmark functions, sweeps kernel
hyper-parameter grids, compares surrogate RMSE, aggregates finished
experiments and samples 2-D landscapes.

Exit status: 0 on success, 1 if any run failed or output could not be
written, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

import pandas as pd

from . import __version__
from .benchmarks import available_objectives
from .config import load_config
from .errors import ConfigurationError, PolyBOError
from .experiment import (
    GROUPING_COLUMNS,
    aggregate,
    convergence_summary,
    landscape_grid,
    replicate_seed,
    run_experiment,
    surrogate_comparison,
)
from .exporter import read_curves, read_summary
from .gp import KernelFamily, KernelSpec
from .pmbo import BO_FIXED, PMBO

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_CONFIG_ERROR = 2

ALL_KERNELS = tuple(k.value for k in KernelFamily)


def _add_common(parser, algo_nargs="+"):
    parser.add_argument("--config", help="TOML experiment file")
    parser.add_argument("--function", type=int, nargs="+", help="benchmark id(s): " + ", ".join(
        f"{i}={name}" for i, name in available_objectives().items()))
    parser.add_argument("--dim", type=int, nargs="+", help="dimension(s) m")
    parser.add_argument("--algo", nargs=algo_nargs, choices=[PMBO, BO_FIXED], help="algorithm(s)")
    parser.add_argument("--kernel", nargs="+", help="kernel famil(ies): " + ", ".join(ALL_KERNELS))
    parser.add_argument("--range", type=float, nargs="+", help="kernel range(s) l")
    parser.add_argument("--sigma2", type=float, nargs="+", help="process variance(s)")
    parser.add_argument("--budget", type=int, help="objective evaluations per run (default 100*m)")
    parser.add_argument("--replicates", type=int, help="replicates per grid cell (default 5)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=["csv", "jsonl", "xlsx"], help="summary format")
    parser.add_argument("--jobs", type=int, help="worker processes")
    parser.add_argument("--shift", action="store_true", default=None, help="randomly translate the optimum")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polybo",
        description="Polynomial-mean Bayesian optimization benchmark harness",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replicated runs of one algorithm on one function")
    _add_common(run, algo_nargs=1)

    sweep = sub.add_parser("sweep", help="full kernel x range x variance grid for both algorithms")
    _add_common(sweep)

    rmse = sub.add_parser("rmse", help="surrogate RMSE of PMBO vs. the zero-mean GP")
    _add_common(rmse)
    rmse.add_argument("--samples", type=int, default=50, help="training samples (default 50)")
    rmse.add_argument("--grid", type=int, default=10_000, help="test points (default 10000)")

    compare = sub.add_parser("compare", help="aggregate an existing experiment output")
    _add_common(compare)
    compare.add_argument("paths", nargs="*", help="output directories or summary files (default --out)")
    compare.add_argument("--group-by", nargs="+", default=["function_id", "dimension", "algorithm"],
                         choices=list(GROUPING_COLUMNS), help="grouping columns")

    landscape = sub.add_parser("landscape", help="truth and surrogate means on a 2-D lattice")
    _add_common(landscape)
    landscape.add_argument("--samples", type=int, default=50, help="training samples (default 50)")
    landscape.add_argument("--resolution", type=int, default=50, help="lattice points per axis")
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _overrides(args):
    overrides = {
        "functions": args.function,
        "dimensions": args.dim,
        "algorithms": args.algo,
        "kernel_families": args.kernel,
        "ranges": args.range,
        "variances": args.sigma2,
        "budget": args.budget,
        "replicates": args.replicates,
        "seed": args.seed,
        "output": args.out,
        "format": args.format,
        "jobs": args.jobs,
        "shift": args.shift,
    }
    if args.range or args.sigma2:
        overrides["kernel_grid"] = "explicit"
    return overrides


def _print_header(title):
    print(f"📈 PolyBO Benchmark Harness v{__version__}")
    print(f"🎯 {title}")
    print("=" * 50)


def _report_progress(result):
    s = result.spec
    status = "❌" if result.failed else "✅"
    best = "n/a" if result.final_best is None else f"{result.final_best:.6g}"
    where = "" if result.best_x is None else " at (" + ", ".join(f"{v:.4g}" for v in result.best_x) + ")"
    print(f"   {status} run {s.run_id:>4}  f{s.function_id} m={s.dimension} {s.algorithm:<8} "
          f"{s.kernel.family.value} l={s.kernel.length_scale:g} s2={s.kernel.variance:g} "
          f"rep={s.replicate}  best={best}{where}")


def _run_grid(args, defaults, title, single=False):
    config = load_config(args.config, _overrides(args), defaults=defaults)
    if single and (len(config.functions) != 1 or len(config.algorithms) != 1):
        raise ConfigurationError("`run` takes exactly one function and one algorithm; use `sweep` for grids")
    _print_header(title)
    print(f"📁 Output: {config.output}  ({config.format})")
    print(f"🔢 Master seed {config.seed}; replicate seeds "
          + ", ".join(str(replicate_seed(config.seed, r)) for r in range(config.replicates)))
    print()

    report = run_experiment(config, write=True, progress=_report_progress)

    print()
    print("📊 Final best value (median and IQR):")
    print(aggregate(report).to_string(index=False))
    failed = report.failed_runs
    if failed:
        print(f"\n❌ {len(failed)} of {len(report)} runs failed; see {Path(config.output) / 'report.md'}")
        return EXIT_RUN_FAILED
    print(f"\n✅ {len(report)} runs complete: {Path(config.output).resolve()}")
    return EXIT_OK


def cmd_run(args):
    return _run_grid(args, {"algorithms": (PMBO,)}, "Single algorithm run", single=True)


def cmd_sweep(args):
    defaults = {"kernel_grid": "standard", "kernel_families": ALL_KERNELS}
    return _run_grid(args, defaults, "Hyper-parameter sweep")


def cmd_rmse(args):
    config = load_config(args.config, _overrides(args), defaults={"functions": (1, 15, 20)})
    _print_header(f"Surrogate RMSE on {args.samples} samples, {args.grid} test points")
    rows, failures = [], 0
    for function_id in config.functions:
        for m in config.dimensions:
            for kernel in config.kernels_for(m):
                for replicate in range(config.replicates):
                    seed = replicate_seed(config.seed, replicate)
                    try:
                        row = surrogate_comparison(function_id, m, args.samples, kernel, seed,
                                                   grid_size=args.grid, shift=config.shift)
                    except PolyBOError as exc:
                        print(f"   ❌ f{function_id} m={m} rep={replicate}: {exc}")
                        logger.error("rmse comparison failed: %s", exc)
                        failures += 1
                        continue
                    row["replicate"] = replicate
                    rows.append(row)
                    print(f"   ✅ f{function_id} m={m} {kernel.family.value} rep={replicate}: "
                          f"PMBO {row['rmse_pmbo']:.3e}  BO {row['rmse_bo']:.3e}")

    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(rows)
    path = out / "rmse.csv"
    table.to_csv(path, index=False)
    if not table.empty:
        print("\n📊 Median RMSE:")
        print(table.groupby(["function", "dimension"])[["rmse_pmbo", "rmse_bo"]].median().to_string())
    print(f"\n✅ RMSE table: {path}")
    return EXIT_RUN_FAILED if failures else EXIT_OK


def _filter_summary(summary, args):
    filters = {
        "function_id": args.function,
        "dimension": args.dim,
        "algorithm": args.algo,
        "kernel": [KernelFamily.parse(k).value for k in args.kernel] if args.kernel else None,
        "l": args.range,
        "sigma2": args.sigma2,
    }
    mask = pd.Series(True, index=summary.index)
    for column, allowed in filters.items():
        if allowed:
            mask &= summary[column].isin(allowed)
    return summary[mask]


def cmd_compare(args):
    config = load_config(args.config, _overrides(args))
    sources = args.paths or [config.output]
    _print_header("Compare finished experiments")

    summaries, curves = [], []
    offset = 0
    for source in sources:
        summary = read_summary(source)
        curve = read_curves(source if Path(source).is_dir() else Path(source).parent)
        if not curve.empty:
            curve = curve.assign(run_id=curve["run_id"] + offset)
        summaries.append(summary)
        curves.append(curve)
        offset += len(summary)
        print(f"📥 {source}: {len(summary)} runs")

    summary = pd.concat(summaries, ignore_index=True)
    curves = pd.concat(curves, ignore_index=True)
    selected = _filter_summary(summary, args)
    table = aggregate(selected, by=args.group_by)
    print("\n📊 Final best value:")
    print(table.to_string(index=False))

    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "aggregates.csv", index=False)
    convergence = convergence_summary(summary, curves[curves["run_id"].isin(selected.index)])
    convergence.to_csv(out / "convergence.csv", index=False)
    print(f"\n✅ Aggregates: {out / 'aggregates.csv'}")
    print(f"✅ Convergence curves: {out / 'convergence.csv'}")
    return EXIT_OK


def cmd_landscape(args):
    config = load_config(args.config, _overrides(args))
    if any(m != 2 for m in config.dimensions):
        raise ConfigurationError("landscape sampling is only defined for --dim 2")
    kernel = KernelSpec(config.kernel_families[0], config.ranges[0], config.variances[0])
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    _print_header(f"Landscape sampling ({args.resolution} x {args.resolution})")
    for function_id in config.functions:
        frame = landscape_grid(function_id, args.samples, kernel, config.seed, args.resolution)
        path = out / f"landscape_f{function_id}.csv"
        frame.to_csv(path, index=False)
        print(f"   ✅ f{function_id}: {path}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "rmse": cmd_rmse,
    "compare": cmd_compare,
    "landscape": cmd_landscape,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    started = datetime.now()
    try:
        status = COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (PolyBOError, OSError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    print(f"\n📅 Finished {datetime.now().strftime('%Y-%m-%d %H:%M:%S')} "
          f"({(datetime.now() - started).total_seconds():.1f}s)")
    return status


if __name__ == "__main__":
    sys.exit(main())
