"""
Polynomial Regression
Least-squares fitting of the Newton surrogate to scattered samples in the
Lagrange basis, and the degree-update rule of the optimizer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, RankDeficientError, UnderdeterminedError
from .interpolation import (
    NodeSequence,
    PolynomialSurrogate,
    lagrange_basis_matrix,
    lagrange_to_newton,
    leja_chebyshev_nodes,
)
from .multiindex import MultiIndexSet, build_multi_index_set, cached_cardinality

logger = logging.getLogger(__name__)

# Columns whose QR diagonal falls below RANK_TOLERANCE * max|diag| count as dependent
RANK_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    index_set: MultiIndexSet
    generating_nodes: NodeSequence
    regression_matrix: np.ndarray
    observations: np.ndarray

    def __post_init__(self):
        matrix = np.atleast_2d(np.asarray(self.regression_matrix, dtype=float))
        observations = np.asarray(self.observations, dtype=float).reshape(-1)
        if matrix.shape[0] != observations.size:
            raise DimensionMismatchError(
                f"regression matrix has {matrix.shape[0]} rows but {observations.size} observations"
            )
        if matrix.shape[1] != len(self.index_set):
            raise DimensionMismatchError(
                f"regression matrix has {matrix.shape[1]} columns for |A| = {len(self.index_set)}"
            )
        object.__setattr__(self, "regression_matrix", matrix)
        object.__setattr__(self, "observations", observations)

    @property
    def sample_count(self):
        return self.observations.size

    @classmethod
    def from_samples(cls, index_set, samples, observations, nodes=None):
        """Assemble R_A from cube samples using the LCL nodes of the set's degree."""
        nodes = nodes if nodes is not None else leja_chebyshev_nodes(index_set.n)
        matrix = build_regression_matrix(index_set, nodes, samples)
        return cls(index_set, nodes, matrix, observations)


def build_regression_matrix(index_set: MultiIndexSet, nodes: NodeSequence, samples) -> np.ndarray:
    """R_A = (L_alpha(x_i)) for samples already mapped to [-1, 1]^m."""
    return lagrange_basis_matrix(index_set, nodes, samples)


def least_squares_fit(problem: RegressionProblem) -> PolynomialSurrogate:
    """
    Minimize ||R_A c - F|| by column-pivoted QR and return the surrogate in
    Newton form. Raises UnderdeterminedError if N < |A| and
    RankDeficientError if the numerical rank is below |A|.
    """
    n_samples, n_coeffs = problem.sample_count, len(problem.index_set)
    if n_samples < n_coeffs:
        raise UnderdeterminedError(f"{n_samples} samples cannot determine {n_coeffs} coefficients")

    q, r, perm = linalg.qr(problem.regression_matrix, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r))
    rank = int(np.sum(diagonal > RANK_TOLERANCE * diagonal.max())) if diagonal.size else 0
    if rank < n_coeffs:
        raise RankDeficientError(
            f"regression matrix has numerical rank {rank} < {n_coeffs}", rank=rank, columns=n_coeffs
        )

    lagrange_coeffs = np.empty(n_coeffs)
    lagrange_coeffs[perm] = linalg.solve_triangular(r, q.T @ problem.observations)

    residual = problem.regression_matrix @ lagrange_coeffs - problem.observations
    logger.debug(
        "least squares fit: N=%d |A|=%d residual=%.3e", n_samples, n_coeffs, float(np.linalg.norm(residual))
    )

    newton_coeffs = lagrange_to_newton(problem.index_set, problem.generating_nodes) @ lagrange_coeffs
    return PolynomialSurrogate(problem.index_set, problem.generating_nodes, newton_coeffs)


def should_increase_degree(current_degree: int, m: int, p: float, sample_count: int) -> bool:
    """True iff |A_{m,n+1,p}| < N_s (the surrogate may grow by one degree)."""
    if sample_count <= 0:
        return False
    return cached_cardinality(m, current_degree + 1, float(p)) < sample_count


def degree_for_sample_count(m: int, p: float, sample_count: int, oversampling: float = 2.0) -> int:
    """Largest n with oversampling * |A_{m,n,p}| <= N (0 if even the constant does not fit)."""
    n = 0
    while oversampling * cached_cardinality(m, n + 1, float(p)) <= sample_count:
        n += 1
    return n


def fit_samples(samples, observations, degree: int, m: int, p: float = 2.0) -> PolynomialSurrogate:
    """Convenience wrapper: build A_{m,n,p}, R_A and solve in one call."""
    index_set = build_multi_index_set(m, degree, p)
    return least_squares_fit(RegressionProblem.from_samples(index_set, samples, observations))
