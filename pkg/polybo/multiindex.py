"""
Multi-Index Sets
Exponent sets A_{m,n,p} = {alpha in N^m : ||alpha||_p <= n} spanning the
polynomial spaces used by the surrogate.

Sets are ordered lexicographically with the LAST coordinate most
significant, so for every fixed (alpha_2, ..., alpha_m) the indices that vary
only in alpha_1 form one contiguous block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDegreeParameterError, InvalidDimensionError

# Relative slack for ||alpha||_p <= n with non-integer p
NORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MultiIndexSet:
    """Ordered exponent vectors of A_{m,n,p} (immutable)."""

    m: int
    n: int
    p: float
    exponents: np.ndarray

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return (tuple(int(a) for a in alpha) for alpha in self.exponents)

    def __eq__(self, other):
        if not isinstance(other, MultiIndexSet):
            return NotImplemented
        return (self.m, self.n, self.p) == (other.m, other.n, other.p) and np.array_equal(
            self.exponents, other.exponents
        )

    def __hash__(self):
        return hash((self.m, self.n, self.p, self.exponents.tobytes()))

    @property
    def max_exponent(self):
        """Largest single coordinate appearing in the set."""
        return int(self.exponents.max()) if len(self.exponents) else 0

    def as_tuples(self):
        return list(iter(self))

    def issubset(self, other: "MultiIndexSet") -> bool:
        return set(self.as_tuples()) <= set(other.as_tuples())


def _within_lp_ball(candidates: np.ndarray, n: int, p: float) -> np.ndarray:
    if math.isinf(p):
        return candidates.max(axis=1) <= n
    if float(p).is_integer():
        # integer powers stay exact in int64 for the degrees used here
        q = int(p)
        return (candidates.astype(np.int64) ** q).sum(axis=1) <= n ** q
    powered = (candidates.astype(float) ** p).sum(axis=1)
    return powered <= float(n) ** p * (1.0 + NORM_TOLERANCE)


def build_multi_index_set(m: int, n: int, p: float = 2.0) -> MultiIndexSet:
    """
    Build A_{m,n,p} in lexicographic order (last coordinate most significant).
    """
    if int(m) != m or m < 1:
        raise InvalidDimensionError(f"spatial dimension must be a positive integer, got {m}")
    if int(n) != n or n < 0:
        raise InvalidDegreeParameterError(f"polynomial degree must be a non-negative integer, got {n}")
    p = float(p)
    if not p > 0:
        raise InvalidDegreeParameterError(f"degree norm parameter must be positive or inf, got {p}")
    m, n = int(m), int(n)

    # every coordinate of a member is <= n whatever p is, so the (n+1)^m box covers the set
    box = np.indices((n + 1,) * m).reshape(m, -1).T
    members = box[_within_lp_ball(box, n, p)]

    # np.lexsort treats its last key as the primary one
    order = np.lexsort(members.T)
    exponents = np.ascontiguousarray(members[order], dtype=np.int64)
    exponents.setflags(write=False)
    return MultiIndexSet(m=m, n=n, p=p, exponents=exponents)


def cardinality(index_set: MultiIndexSet) -> int:
    """Number of multi-indices |A| (= number of polynomial coefficients)."""
    return len(index_set.exponents)


@lru_cache(maxsize=512)
def cached_cardinality(m: int, n: int, p: float) -> int:
    """|A_{m,n,p}| without keeping the set around."""
    return cardinality(build_multi_index_set(m, n, p))
