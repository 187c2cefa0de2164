"""Exception types raised by the package."""


class GamlssBoostError(Exception):
    """Base class for all package errors."""


class DataError(GamlssBoostError, ValueError):
    """Malformed input data: unreadable CSV, missing or non-numeric cells."""


class DomainError(GamlssBoostError, ValueError):
    """Response or predictor values outside the family's support."""


class NonFiniteError(GamlssBoostError, FloatingPointError):
    """A likelihood quantity evaluated to NaN or infinity.

    ``index`` holds the offending observation (0-based) when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(GamlssBoostError, RuntimeError):
    """An iterative solver did not converge."""


class SchemeError(GamlssBoostError, ValueError):
    """Invalid step-length scheme for the requested family."""


class DegenerateBaseLearnerError(GamlssBoostError, ValueError):
    """A fitted base-learner has zero norm where a division by it is needed."""


class FitError(GamlssBoostError):
    """Wraps a failure inside the boosting loop with the iteration index."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
