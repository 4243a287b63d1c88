"""
PolyBO Benchmark Harness - Main Script
Runs polynomial-mean Bayesian optimization against the BO_fixed baseline

Examples:
  python run_benchmarks.py run --function 1 --dim 2 --algo pmbo --replicates 5
  python run_benchmarks.py sweep --config configs/sweep_m2.toml --jobs 8
  python run_benchmarks.py rmse --dim 2 --replicates 5
  python run_benchmarks.py compare results --group-by algorithm sigma2 --kernel Matern52 --range 100
"""

import sys

from polybo.harness_cli import main

if __name__ == "__main__":
    sys.exit(main())
