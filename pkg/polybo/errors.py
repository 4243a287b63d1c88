"""
PolyBO Exceptions
Error types raised by the surrogate, optimizer and harness modules
"""

from numpy.linalg import LinAlgError


class PolyBOError(Exception):
    """Base class for every error raised by polybo."""


class InvalidDimensionError(PolyBOError, ValueError):
    pass


class InvalidDegreeParameterError(PolyBOError, ValueError):
    pass


class InsufficientNodesError(PolyBOError, ValueError):
    pass


class DimensionMismatchError(PolyBOError, ValueError):
    pass


class LengthMismatchError(PolyBOError, ValueError):
    pass


class UnderdeterminedError(PolyBOError, LinAlgError):
    """Fewer samples than polynomial coefficients."""


class RankDeficientError(PolyBOError, LinAlgError):
    """Regression matrix has numerical column rank below |A|."""

    def __init__(self, message, rank=None, columns=None):
        super().__init__(message)
        self.rank = rank
        self.columns = columns


class FactorizationError(PolyBOError, LinAlgError):
    """Covariance matrix could not be factorized even at the largest nugget."""


class OutOfBoundsError(PolyBOError, ValueError):
    pass


class UnknownObjectiveError(PolyBOError, ValueError):
    pass


class ConfigurationError(PolyBOError, ValueError):
    pass


class ObjectiveEvaluationError(PolyBOError, RuntimeError):
    """The objective raised; ``trace`` holds every record completed so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class OutputDirectoryError(PolyBOError, OSError):
    pass
