"""Exception types shared across the package."""


class ParcmaError(Exception):
    """Base class for all parcma-specific errors."""


class DegenerateCovariance(ParcmaError):
    """Covariance matrix lost positive semidefiniteness beyond round-off,
    or its eigendecomposition failed outright."""


class NotPositiveDefinite(ParcmaError):
    """Cholesky factorization hit a non-positive pivot."""


class InsufficientPoints(ParcmaError, ValueError):
    """Too few sample points for the requested covariance estimate."""


class NonPositiveStepSize(ParcmaError, ValueError):
    """Initial step size must be strictly positive and finite."""


class UnknownBenchmark(ParcmaError, ValueError):
    """Requested benchmark name is not in the registry."""


class ObjectiveFailure(ParcmaError):
    """An objective function evaluation raised instead of returning a value."""


class WorkerFailure(ObjectiveFailure):
    """An evaluation failed inside the batch evaluator.

    Carries the index of the failing point so callers can re-associate the
    failure with the candidate that triggered it.
    """

    def __init__(self, index, message=""):
        self.index = index
        super().__init__(message or f"evaluation of batch point {index} failed")
