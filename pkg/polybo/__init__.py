"""
PolyBO Package
Polynomial-mean Bayesian optimization: multivariate Newton/Lagrange
surrogates as the prior mean of a Gaussian process, the BO_fixed baseline,
benchmark functions and the experiment harness.
"""

__version__ = "1.0"

from .acquisition import AcquisitionFamily, AcquisitionSpec, acquisition_value, propose_next, score_candidates
from .benchmarks import ObjectiveSpec, available_objectives, make_objective, surrogate_rmse
from .errors import PolyBOError
from .gp import GpModel, KernelFamily, KernelSpec, fit_gp, kernel_correlation, posterior
from .interpolation import (
    DomainTransform,
    NodeSequence,
    PolynomialSurrogate,
    dds_fit,
    lagrange_basis_matrix,
    leja_chebyshev_nodes,
    newton_evaluate,
    unisolvent_grid,
)
from .multiindex import MultiIndexSet, build_multi_index_set, cardinality
from .pmbo import (
    OptimizationTrace,
    PmboConfig,
    SamplingStrategy,
    initial_design,
    inverse_min_max_transform,
    min_max_transform,
    run_bo_fixed,
    run_pmbo,
)
from .regression import RegressionProblem, least_squares_fit, should_increase_degree
