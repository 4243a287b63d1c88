"""
Gaussian Process Posterior
Correlation kernels, covariance assembly with nugget escalation, and the
posterior mean / variance with either a polynomial prior mean (universal
kriging) or a zero prior mean (plain Bayesian optimization).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, FactorizationError
from .interpolation import PolynomialSurrogate, lagrange_basis_matrix

logger = logging.getLogger(__name__)

INITIAL_NUGGET = 1e-10
MAX_NUGGET = 1e-4
NUGGET_GROWTH = 10.0
ZERO_DISTANCE = 1e-12

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


class KernelFamily(str, enum.Enum):
    MATERN32 = "Matern32"
    MATERN52 = "Matern52"
    SQUARED_EXPONENTIAL = "SquaredExponential"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        aliases = {
            "matern32": cls.MATERN32,
            "matern3/2": cls.MATERN32,
            "matern52": cls.MATERN52,
            "matern5/2": cls.MATERN52,
            "squaredexponential": cls.SQUARED_EXPONENTIAL,
            "se": cls.SQUARED_EXPONENTIAL,
            "rbf": cls.SQUARED_EXPONENTIAL,
        }
        if key not in aliases:
            raise ValueError(f"unknown kernel family {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic correlation kernel with range l and process variance sigma^2."""

    family: KernelFamily = KernelFamily.MATERN32
    length_scale: float = 1.0
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily.parse(self.family))
        if not self.length_scale > 0:
            raise ValueError(f"range parameter l must be positive, got {self.length_scale}")
        if not self.variance > 0:
            raise ValueError(f"process variance must be positive, got {self.variance}")

    def correlation(self, distance):
        """k as a function of the Euclidean distance (k(0) = 1)."""
        r = np.asarray(distance, dtype=float) / self.length_scale
        if self.family is KernelFamily.MATERN32:
            return (1.0 + SQRT3 * r) * np.exp(-SQRT3 * r)
        if self.family is KernelFamily.MATERN52:
            return (1.0 + SQRT5 * r + 5.0 * r**2 / 3.0) * np.exp(-SQRT5 * r)
        return np.exp(-0.5 * r**2)


def kernel_correlation(spec: KernelSpec, x, x_prime) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    x_prime = np.asarray(x_prime, dtype=float).reshape(-1)
    if x.shape != x_prime.shape:
        raise DimensionMismatchError("kernel arguments differ in dimension")
    return float(spec.correlation(np.linalg.norm(x - x_prime)))


def correlation_matrix(spec: KernelSpec, points_a, points_b) -> np.ndarray:
    a = np.atleast_2d(np.asarray(points_a, dtype=float))
    b = np.atleast_2d(np.asarray(points_b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError("point sets differ in dimension")
    return spec.correlation(cdist(a, b))


@dataclass(frozen=True, eq=False)
class GpModel:
    """Fitted GP; immutable once returned by fit_gp."""

    kernel: KernelSpec
    training_inputs: np.ndarray
    training_outputs: np.ndarray
    mean_model: Optional[PolynomialSurrogate]
    cholesky_factor: np.ndarray
    weights: np.ndarray
    nugget: float
    nugget_escalated: bool
    regression_matrix: Optional[np.ndarray] = None
    # C^-1 R_A and the (pseudo-)inverse of R_A^T C^-1 R_A, or the matrix itself
    # when uninverted_trend_variance is set
    whitened_regression: Optional[np.ndarray] = None
    trend_precision: Optional[np.ndarray] = None
    uninverted_trend_variance: bool = False

    @property
    def dimension(self):
        return self.training_inputs.shape[1]

    @property
    def incumbent(self):
        return float(np.min(self.training_outputs))

    def prior_mean(self, points):
        if self.mean_model is None:
            return np.zeros(np.atleast_2d(points).shape[0])
        return np.atleast_1d(self.mean_model.evaluate_cube(np.atleast_2d(points)))


def _factorize(covariance: np.ndarray, variance: float):
    nugget = INITIAL_NUGGET * variance
    escalated = False
    identity = np.eye(covariance.shape[0])
    while True:
        try:
            factor = linalg.cholesky(covariance + nugget * identity, lower=True)
            return factor, nugget, escalated
        except linalg.LinAlgError:
            if nugget >= MAX_NUGGET * variance * (1.0 - 1e-12):
                raise FactorizationError(
                    f"covariance not positive definite at nugget {nugget:.1e}; near-duplicate inputs?"
                ) from None
            nugget = min(nugget * NUGGET_GROWTH, MAX_NUGGET * variance)
            escalated = True
            logger.info("Cholesky failed, escalating nugget to %.1e", nugget)


def fit_gp(
    inputs,
    outputs,
    mean_model: Optional[PolynomialSurrogate],
    kernel: KernelSpec,
    uninverted_trend_variance: bool = False,
) -> GpModel:
    """
    Condition the GP on (X, Y) with C = sigma^2 K + nugget I.
    ``mean_model`` None gives the zero-mean process.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(outputs, dtype=float).reshape(-1)
    if x.shape[0] != y.size:
        raise DimensionMismatchError(f"{x.shape[0]} inputs but {y.size} outputs")
    if mean_model is not None and mean_model.dimension != x.shape[1]:
        raise DimensionMismatchError("mean model and inputs differ in dimension")

    covariance = kernel.variance * correlation_matrix(kernel, x, x)
    factor, nugget, escalated = _factorize(covariance, kernel.variance)

    prior = np.zeros(y.size) if mean_model is None else mean_model.evaluate_cube(x)
    weights = linalg.cho_solve((factor, True), y - prior)

    regression = whitened = precision = None
    if mean_model is not None:
        regression = lagrange_basis_matrix(mean_model.index_set, mean_model.generating_nodes, x)
        whitened = linalg.cho_solve((factor, True), regression)
        trend = regression.T @ whitened
        precision = trend if uninverted_trend_variance else linalg.pinvh(trend)

    return GpModel(
        kernel=kernel,
        training_inputs=x,
        training_outputs=y,
        mean_model=mean_model,
        cholesky_factor=factor,
        weights=weights,
        nugget=nugget,
        nugget_escalated=escalated,
        regression_matrix=regression,
        whitened_regression=whitened,
        trend_precision=precision,
        uninverted_trend_variance=uninverted_trend_variance,
    )


def _cross_covariance(model: GpModel, points: np.ndarray):
    """
    c(x) against the training inputs. The nugget belongs to the kernel at
    zero distance, so c(x_i) is row i of C.
    """
    distance = cdist(points, model.training_inputs)
    coincident = distance <= ZERO_DISTANCE
    cross = model.kernel.variance * model.kernel.correlation(distance) + model.nugget * coincident
    return cross, coincident


def posterior(model: GpModel, x):
    """
    Posterior mean and variance at x (one m-vector -> floats, (k, m) batch ->
    arrays). Variance is clamped at zero. At a training input the mean is the
    observed value.
    """
    single = np.ndim(x) == 1
    points = np.atleast_2d(np.asarray(x, dtype=float))
    if points.shape[1] != model.dimension:
        raise DimensionMismatchError(f"expected points of dimension {model.dimension}, got {points.shape[1]}")

    cross, coincident = _cross_covariance(model, points)
    mean = model.prior_mean(points) + cross @ model.weights
    rows, cols = np.nonzero(coincident)
    mean[rows] = model.training_outputs[cols]

    # v = L^-1 c(x)^T keeps the reduction in sqrt of the condition number of C
    v = linalg.solve_triangular(model.cholesky_factor, cross.T, lower=True)
    prior_variance = model.kernel.variance + model.nugget * coincident.any(axis=1)
    variance = prior_variance - np.sum(v * v, axis=0)

    if model.mean_model is not None:
        basis = lagrange_basis_matrix(model.mean_model.index_set, model.mean_model.generating_nodes, points)
        u = model.whitened_regression.T @ cross.T - basis.T
        variance = variance + np.sum(u * (model.trend_precision @ u), axis=0)

    variance = np.maximum(variance, 0.0)
    if single:
        return float(mean[0]), float(variance[0])
    return mean, variance


def posterior_mean(model: GpModel, points) -> np.ndarray:
    return posterior(model, np.atleast_2d(points))[0]
