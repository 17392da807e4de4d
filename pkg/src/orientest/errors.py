"""Exception types raised across the library."""


class OrientestError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(OrientestError, ValueError):
    """An argument violates a precondition (non-finite, wrong shape, ...)."""


class InvalidConfigError(OrientestError, ValueError):
    """A configuration value is out of bounds or inconsistent."""


class InvalidLabelError(OrientestError, ValueError):
    """A class label is outside the discretization scheme's range."""


class DegenerateVectorError(OrientestError, ValueError):
    """A 2D point is too close to the origin to define an angle."""


class EmptyVotesError(OrientestError, ValueError):
    """A vote set carries no probability mass to decode."""


class ConvergenceError(OrientestError, RuntimeError):
    """Mean-shift failed to converge from every start.

    Carries ``best_angle``, the highest-density iterate reached, so callers
    can fall back to it deliberately.
    """

    def __init__(self, message, best_angle):
        super().__init__(message)
        self.best_angle = best_angle


class DivergenceError(OrientestError, RuntimeError):
    """Training produced a non-finite loss. Carries ``iteration``."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class DatasetFormatError(OrientestError, ValueError):
    """A dataset or votes file is malformed. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class EmptyDatasetError(OrientestError, ValueError):
    """A dataset file or in-memory dataset contains no samples."""
