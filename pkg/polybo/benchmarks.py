"""
Benchmark Objectives
Canonical Sphere, Attractive Sector, Ellipsoidal, Rastrigin and Schwefel
functions indexed by their BBOB ids, with optional random translation of
the optimum, plus the RMSE metric used to compare surrogates.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatchError, InvalidDimensionError, UnknownObjectiveError

logger = logging.getLogger(__name__)

SCHWEFEL_CONSTANT = 418.9828872724339
SCHWEFEL_MINIMIZER = 420.9687462275036
SECTOR_SCALE = 100.0
# shifts stay inside the central SHIFT_FRACTION of every box edge
SHIFT_FRACTION = 0.8


def _sphere(z, orientation=None):
    return np.sum(z**2, axis=1)


def _ellipsoidal(z, orientation=None):
    m = z.shape[1]
    weights = 10.0 ** (6.0 * np.arange(m) / (m - 1))
    return z**2 @ weights


def _rastrigin(z, orientation=None):
    m = z.shape[1]
    return 10.0 * m + np.sum(z**2 - 10.0 * np.cos(2.0 * np.pi * z), axis=1)


def _attractive_sector(z, orientation):
    scale = np.where(z * orientation > 0, SECTOR_SCALE, 1.0)
    return np.sum((scale * z) ** 2, axis=1)


def _schwefel(z, orientation=None):
    m = z.shape[1]
    return SCHWEFEL_CONSTANT * m - np.sum(z * np.sin(np.sqrt(np.abs(z))), axis=1)


# id -> (name, evaluator, half-width of the box, accepts a shift)
CATALOGUE = {
    1: ("Sphere", _sphere, 5.0, True),
    6: ("Attractive Sector", _attractive_sector, 5.0, True),
    10: ("Ellipsoidal", _ellipsoidal, 5.0, True),
    15: ("Rastrigin", _rastrigin, 5.0, True),
    20: ("Schwefel", _schwefel, 500.0, False),
}


def available_objectives():
    """Supported benchmark ids and their names."""
    return {function_id: entry[0] for function_id, entry in CATALOGUE.items()}


@dataclass(eq=False)
class ObjectiveSpec:
    """
    A benchmark instance. Calling it on one point counts the evaluation;
    evaluate_batch does not.
    """

    function_id: int
    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Callable[[np.ndarray], np.ndarray]
    optimum_x: Optional[np.ndarray] = None
    optimum_value: Optional[float] = None
    shift: Optional[np.ndarray] = None
    shift_seed: Optional[int] = None
    call_count: int = field(default=0, init=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_lock", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def bounds(self):
        return self.lower, self.upper

    @property
    def has_optimum(self):
        return self.optimum_value is not None

    def _translated(self, points):
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if x.shape[1] != self.dimension:
            raise DimensionMismatchError(f"{self.name} expects dimension {self.dimension}, got {x.shape[1]}")
        return x if self.shift is None else x - self.shift

    def evaluate_batch(self, points) -> np.ndarray:
        return self.evaluator(self._translated(points))

    def __call__(self, x) -> float:
        value = float(self.evaluate_batch(np.asarray(x, dtype=float).reshape(1, -1))[0])
        with self._lock:
            self.call_count += 1
        return value

    def reset_counter(self):
        with self._lock:
            self.call_count = 0

    def regret(self, y):
        if not self.has_optimum:
            return None
        return float(y) - self.optimum_value


def _draw_shift(lower, upper, seed):
    rng = np.random.default_rng(seed)
    margin = 0.5 * (1.0 - SHIFT_FRACTION) * (upper - lower)
    return rng.uniform(lower + margin, upper - margin)


def make_objective(function_id: int, m: int, shift_seed: Optional[int] = None) -> ObjectiveSpec:
    """
    Build benchmark ``function_id`` in dimension m. With ``shift_seed`` the
    optimum is moved to a random point of the central box (Schwefel ignores
    the shift).
    """
    try:
        function_id = int(function_id)
    except (TypeError, ValueError):
        raise UnknownObjectiveError(f"unknown benchmark id {function_id!r}") from None
    if function_id not in CATALOGUE:
        raise UnknownObjectiveError(
            f"unknown benchmark id {function_id}; choose one of {sorted(CATALOGUE)}"
        )
    if int(m) != m or m < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {m}")
    m = int(m)
    if function_id == 10 and m < 2:
        raise InvalidDimensionError("the Ellipsoidal function needs m >= 2")

    name, evaluator, half_width, shiftable = CATALOGUE[function_id]
    lower = np.full(m, -half_width)
    upper = np.full(m, half_width)

    shift = None
    if shift_seed is not None and shiftable:
        shift = _draw_shift(lower, upper, shift_seed)
    elif shift_seed is not None:
        logger.debug("%s is not shifted; ignoring shift seed %s", name, shift_seed)

    if function_id == 20:
        optimum_x = np.full(m, SCHWEFEL_MINIMIZER)
    else:
        optimum_x = np.zeros(m) if shift is None else shift.copy()

    if function_id == 6:
        orientation = np.ones(m) if shift is None else shift.copy()
        evaluator = partial(evaluator, orientation=orientation)

    return ObjectiveSpec(
        function_id=function_id,
        name=name,
        dimension=m,
        lower=lower,
        upper=upper,
        evaluator=evaluator,
        optimum_x=optimum_x,
        optimum_value=0.0,
        shift=shift,
        shift_seed=shift_seed if shift is not None else None,
    )


def surrogate_rmse(predictor, objective: ObjectiveSpec, grid_size: int, seed, vectorized: bool = True) -> float:
    """
    RMSE of ``predictor`` against the objective on ``grid_size`` uniform test
    points of the objective's box. A vectorized predictor takes a (G, m)
    array; otherwise it is called point by point.
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be at least 1, got {grid_size}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(objective.lower, objective.upper, size=(int(grid_size), objective.dimension))
    truth = objective.evaluate_batch(points)
    if vectorized:
        predicted = np.asarray(predictor(points), dtype=float).reshape(-1)
    else:
        predicted = np.array([float(predictor(x)) for x in points])
    return float(np.sqrt(np.mean((predicted - truth) ** 2)))
