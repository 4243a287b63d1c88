"""
Multivariate Newton Interpolation
Leja-ordered Chebyshev-Lobatto nodes, unisolvent grids, Newton polynomial
evaluation, divided-difference fitting and the Lagrange basis.

All polynomial work happens on the cube [-1, 1]^m. A PolynomialSurrogate
may carry a DomainTransform mapping original coordinates onto the cube.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientNodesError,
    LengthMismatchError,
    OutOfBoundsError,
)
from .multiindex import MultiIndexSet


# Relative tie window for Leja products
LEJA_TIE_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class NodeSequence:
    """Ordered, pairwise distinct generating nodes in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise ValueError("a node sequence needs at least one node")
        if np.any(np.abs(values) > 1.0 + 1e-15):
            raise ValueError("generating nodes must lie in [-1, 1]")
        if np.unique(values).size != values.size:
            raise ValueError("generating nodes must be pairwise distinct")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, NodeSequence):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @property
    def degree(self):
        return self.values.size - 1


@dataclass(frozen=True, eq=False)
class UnisolventGrid:
    index_set: MultiIndexSet
    generating_nodes: NodeSequence
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class DomainTransform:
    """
    Per-dimension min-max map between the box [lb, ub] and [-1, 1].
    Dimensions flagged in ``log_scale`` are mapped in log10 space.
    """

    lower: np.ndarray
    upper: np.ndarray
    log_scale: Optional[np.ndarray] = None

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise DimensionMismatchError("lower and upper bounds differ in length")
        if np.any(lower >= upper):
            raise OutOfBoundsError("every lower bound must be strictly below its upper bound")
        if self.log_scale is None:
            log_scale = np.zeros(lower.size, dtype=bool)
        else:
            log_scale = np.array(self.log_scale, dtype=bool).reshape(-1)
            if log_scale.size != lower.size:
                raise DimensionMismatchError("log_scale flags differ in length from the bounds")
        if np.any(log_scale & (lower <= 0)):
            raise OutOfBoundsError("log-scaled dimensions need strictly positive bounds")
        for arr in (lower, upper, log_scale):
            arr.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "log_scale", log_scale)

    @property
    def dimension(self):
        return self.lower.size

    def _scaled_bounds(self):
        lo = np.where(self.log_scale, np.log10(np.where(self.log_scale, self.lower, 1.0)), self.lower)
        hi = np.where(self.log_scale, np.log10(np.where(self.log_scale, self.upper, 1.0)), self.upper)
        return lo, hi

    def forward(self, points):
        """Original coordinates -> cube."""
        x = np.asarray(points, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DimensionMismatchError(f"expected points of dimension {self.dimension}, got {x.shape[-1]}")
        slack = 1e-12 * (self.upper - self.lower)
        if np.any(x < self.lower - slack) or np.any(x > self.upper + slack):
            raise OutOfBoundsError("point lies outside the declared bounds")
        x = np.clip(x, self.lower, self.upper)
        lo, hi = self._scaled_bounds()
        x = np.where(self.log_scale, np.log10(np.where(self.log_scale, x, 1.0)), x)
        return -1.0 + 2.0 / (hi - lo) * (x - lo)

    def inverse(self, points):
        """Cube -> original coordinates, clipped into the box."""
        z = np.asarray(points, dtype=float)
        if z.shape[-1] != self.dimension:
            raise DimensionMismatchError(f"expected points of dimension {self.dimension}, got {z.shape[-1]}")
        lo, hi = self._scaled_bounds()
        x = lo + (z + 1.0) * (hi - lo) / 2.0
        x = np.where(self.log_scale, 10.0 ** x, x)
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class PolynomialSurrogate:
    """Newton form Q(x) = sum_alpha c_alpha N_alpha(x) over a multi-index set."""

    index_set: MultiIndexSet
    generating_nodes: NodeSequence
    newton_coefficients: np.ndarray
    domain_transform: Optional[DomainTransform] = field(default=None)

    def __post_init__(self):
        coeffs = np.array(self.newton_coefficients, dtype=float).reshape(-1)
        if coeffs.size != len(self.index_set):
            raise LengthMismatchError(
                f"{coeffs.size} coefficients for a multi-index set of size {len(self.index_set)}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "newton_coefficients", coeffs)

    @property
    def dimension(self):
        return self.index_set.m

    @property
    def degree(self):
        return self.index_set.n

    @property
    def lagrange_coefficients(self):
        """Values of the polynomial at the unisolvent grid points."""
        grid = unisolvent_grid(self.index_set, self.generating_nodes)
        return self.evaluate_cube(grid.points)

    def evaluate_cube(self, points):
        single = np.ndim(points) == 1
        basis = newton_matrix(self.index_set, self.generating_nodes, points)
        values = basis @ self.newton_coefficients
        return float(values[0]) if single else values

    def __call__(self, points):
        if self.domain_transform is None:
            return self.evaluate_cube(points)
        return self.evaluate_cube(self.domain_transform.forward(points))

    def with_domain(self, domain_transform):
        return PolynomialSurrogate(
            self.index_set, self.generating_nodes, self.newton_coefficients, domain_transform
        )


def chebyshev_lobatto(n: int) -> NodeSequence:
    """The n+1 Chebyshev-Lobatto points cos(k*pi/n), k = 0..n (not Leja ordered)."""
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    if n == 0:
        return NodeSequence(np.array([1.0]))
    return NodeSequence(np.cos(np.arange(n + 1) * np.pi / n))


def _pick_leja(scores: np.ndarray, values: np.ndarray, candidates: np.ndarray) -> int:
    best = scores[candidates].max()
    tied = candidates[scores[candidates] >= best * (1.0 - LEJA_TIE_TOLERANCE)]
    return int(tied[np.argmax(values[tied])])


def leja_order(nodes: NodeSequence) -> NodeSequence:
    """
    Greedy Leja ordering: start at the node of largest modulus, then keep
    adding the node maximizing the product of distances to those chosen.
    Ties go to the larger node value.
    """
    values = nodes.values
    remaining = np.arange(values.size)
    order = []
    products = np.abs(values).astype(float)
    while remaining.size:
        chosen = _pick_leja(products, values, remaining)
        order.append(chosen)
        remaining = remaining[remaining != chosen]
        if not order[1:]:
            # after the start node the score is the distance product, not the modulus
            products = np.abs(values - values[chosen])
        else:
            products = products * np.abs(values - values[chosen])
    return NodeSequence(values[np.array(order)])


@lru_cache(maxsize=64)
def leja_chebyshev_nodes(n: int) -> NodeSequence:
    """Leja-ordered Chebyshev-Lobatto nodes of degree n (the LCL nodes)."""
    return leja_order(chebyshev_lobatto(n))


def _check_nodes(index_set: MultiIndexSet, nodes: NodeSequence):
    if index_set.max_exponent > nodes.degree:
        raise InsufficientNodesError(
            f"multi-index set of degree {index_set.max_exponent} needs at least "
            f"{index_set.max_exponent + 1} generating nodes, got {len(nodes)}"
        )


def unisolvent_grid(index_set: MultiIndexSet, nodes: NodeSequence) -> UnisolventGrid:
    """Grid points p_alpha = (q_{alpha_1}, ..., q_{alpha_m}), one per multi-index."""
    _check_nodes(index_set, nodes)
    points = nodes.values[index_set.exponents]
    return UnisolventGrid(index_set=index_set, generating_nodes=nodes, points=points)


def _as_points(points, m: int) -> np.ndarray:
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.ndim != 2 or x.shape[1] != m:
        raise DimensionMismatchError(f"expected points of dimension {m}, got shape {np.shape(points)}")
    return x


def newton_matrix(index_set: MultiIndexSet, nodes: NodeSequence, points) -> np.ndarray:
    """
    Matrix of N_alpha(x_i). Per point the cost is O(m * n) for the one
    dimensional product tables plus O(m * |A|) for the gather.
    """
    _check_nodes(index_set, nodes)
    x = _as_points(points, index_set.m)
    n_max = index_set.max_exponent
    q = nodes.values[:n_max]

    # table[i, d, j] = prod_{l<j} (x_{i,d} - q_l)
    table = np.ones((x.shape[0], index_set.m, n_max + 1))
    if n_max:
        table[:, :, 1:] = np.cumprod(x[:, :, None] - q[None, None, :], axis=2)

    basis = np.ones((x.shape[0], len(index_set)))
    for d in range(index_set.m):
        basis *= table[:, d, index_set.exponents[:, d]]
    return basis


def newton_evaluate(surrogate: PolynomialSurrogate, x):
    """Evaluate the surrogate at cube point(s) x."""
    return surrogate.evaluate_cube(x)


def _divided_differences(q: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Classic 1D Newton divided differences, column-wise for 2D input."""
    c = values.copy()
    k = q.size
    for j in range(1, k):
        denom = (q[j:] - q[: k - j]).reshape((-1,) + (1,) * (c.ndim - 1))
        c[j:] = (c[j:] - c[j - 1 : k - 1]) / denom
    return c


def _dds(index_set: MultiIndexSet, nodes: NodeSequence, values: np.ndarray) -> np.ndarray:
    """
    Dimension-recursive divided differences on a downward-closed set: sweep
    the 1D scheme along every line parallel to axis d, for d = 1..m.
    """
    coeffs = np.array(values, dtype=float, copy=True)
    exponents = index_set.exponents
    q = nodes.values
    for d in range(index_set.m):
        rest = np.delete(exponents, d, axis=1)
        order = np.lexsort((exponents[:, d],) + tuple(rest.T))
        sorted_rest = rest[order]
        breaks = np.flatnonzero(np.any(np.diff(sorted_rest, axis=0) != 0, axis=1)) + 1
        for line in np.split(order, breaks):
            if line.size > 1:
                coeffs[line] = _divided_differences(q[: line.size], coeffs[line])
    return coeffs


def dds_fit(index_set: MultiIndexSet, nodes: NodeSequence, values) -> PolynomialSurrogate:
    """Newton coefficients of the interpolant of grid values (given in index-set order)."""
    _check_nodes(index_set, nodes)
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size != len(index_set):
        raise LengthMismatchError(f"{values.size} values for {len(index_set)} grid points")
    return PolynomialSurrogate(index_set, nodes, _dds(index_set, nodes, values))


@lru_cache(maxsize=32)
def lagrange_to_newton(index_set: MultiIndexSet, nodes: NodeSequence) -> np.ndarray:
    """Column alpha holds the Newton coefficients of the Lagrange polynomial L_alpha."""
    _check_nodes(index_set, nodes)
    transform = _dds(index_set, nodes, np.eye(len(index_set)))
    transform.setflags(write=False)
    return transform


def lagrange_basis_matrix(index_set: MultiIndexSet, nodes: NodeSequence, points) -> np.ndarray:
    """Matrix of L_alpha(x_i) with rows per point and columns per multi-index."""
    x = _as_points(points, index_set.m) if np.size(points) else np.empty((0, index_set.m))
    if x.shape[0] == 0:
        return np.empty((0, len(index_set)))
    return newton_matrix(index_set, nodes, x) @ lagrange_to_newton(index_set, nodes)
