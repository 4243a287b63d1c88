"""
Acquisition Functions
Expected Improvement, Probability of Improvement and a minimization UCB
score over the GP posterior, plus the proposal of the next sample.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from .gp import GpModel, posterior

logger = logging.getLogger(__name__)

CANDIDATES_PER_DIMENSION = 1000


class AcquisitionFamily(str, enum.Enum):
    EXPECTED_IMPROVEMENT = "ExpectedImprovement"
    PROBABILITY_OF_IMPROVEMENT = "ProbabilityOfImprovement"
    UPPER_CONFIDENCE_BOUND = "UpperConfidenceBound"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        aliases = {
            "ei": cls.EXPECTED_IMPROVEMENT,
            "expectedimprovement": cls.EXPECTED_IMPROVEMENT,
            "pi": cls.PROBABILITY_OF_IMPROVEMENT,
            "probabilityofimprovement": cls.PROBABILITY_OF_IMPROVEMENT,
            "ucb": cls.UPPER_CONFIDENCE_BOUND,
            "upperconfidencebound": cls.UPPER_CONFIDENCE_BOUND,
        }
        if key not in aliases:
            raise ValueError(f"unknown acquisition family {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class AcquisitionSpec:
    family: AcquisitionFamily = AcquisitionFamily.EXPECTED_IMPROVEMENT
    ucb_beta: float = 2.0
    # None means CANDIDATES_PER_DIMENSION * m, resolved at proposal time
    candidate_count: Optional[int] = None
    refine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", AcquisitionFamily.parse(self.family))
        if not self.ucb_beta > 0:
            raise ValueError(f"ucb_beta must be positive, got {self.ucb_beta}")
        if self.candidate_count is not None and int(self.candidate_count) < 1:
            raise ValueError(f"candidate_count must be at least 1, got {self.candidate_count}")

    def candidates_for(self, m: int) -> int:
        return int(self.candidate_count) if self.candidate_count is not None else CANDIDATES_PER_DIMENSION * m


def acquisition_value(spec: AcquisitionSpec, mean, variance, y_best):
    """
    Score to MAXIMIZE for a minimization problem. Scalars in, float out;
    arrays broadcast.
    """
    mean = np.asarray(mean, dtype=float)
    s = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    improvement = y_best - mean

    if spec.family is AcquisitionFamily.UPPER_CONFIDENCE_BOUND:
        score = -mean + spec.ucb_beta * s
    else:
        positive = s > 0
        safe_s = np.where(positive, s, 1.0)
        z = improvement / safe_s
        if spec.family is AcquisitionFamily.EXPECTED_IMPROVEMENT:
            score = np.where(
                positive,
                improvement * norm.cdf(z) + s * norm.pdf(z),
                np.maximum(improvement, 0.0),
            )
            # cancellation for very negative z
            score = np.maximum(score, 0.0)
        else:
            score = np.where(positive, norm.cdf(z), (improvement > 0).astype(float))

    return float(score) if np.ndim(score) == 0 else score


def score_candidates(model: GpModel, spec: AcquisitionSpec, points) -> np.ndarray:
    mean, variance = posterior(model, np.atleast_2d(points))
    return np.atleast_1d(acquisition_value(spec, mean, variance, model.incumbent))


def _refine(model: GpModel, spec: AcquisitionSpec, start: np.ndarray, start_score: float):
    def negative_score(x):
        return -float(score_candidates(model, spec, x[None, :])[0])

    bounds = [(-1.0, 1.0)] * start.size
    try:
        result = minimize(negative_score, start, method="L-BFGS-B", bounds=bounds)
    except (ValueError, FloatingPointError) as exc:
        logger.debug("acquisition polish failed: %s", exc)
        return start
    polished = np.clip(result.x, -1.0, 1.0)
    if np.isfinite(result.fun) and -result.fun > start_score:
        return polished
    return start


def propose_next(model: GpModel, spec: AcquisitionSpec, seed) -> np.ndarray:
    """
    Uniform candidates in [-1, 1]^m, argmax of the acquisition (first index
    on ties), then an optional bounded L-BFGS-B polish from the winner.
    """
    rng = np.random.default_rng(seed)
    m = model.dimension
    candidates = rng.uniform(-1.0, 1.0, size=(spec.candidates_for(m), m))
    scores = score_candidates(model, spec, candidates)
    best = int(np.argmax(scores))
    proposal = candidates[best]
    if spec.refine:
        proposal = _refine(model, spec, proposal, float(scores[best]))
    return np.clip(proposal, -1.0, 1.0)
