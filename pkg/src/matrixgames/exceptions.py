class MatrixGameError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(MatrixGameError, ValueError):
    """Inputs are malformed: wrong shapes, bad parameters, invalid config."""


class DomainError(MatrixGameError, ValueError):
    """A value lies outside the domain where an operation is defined."""


class EmptySetError(DomainError):
    """The restricted simplex is empty (floor larger than 1/d)."""


class NumericError(MatrixGameError, ArithmeticError):
    """An iterative routine failed to reach its tolerance."""


class NonConvergenceError(NumericError):
    def __init__(self, message, best_gap=float("inf"), iterations=0):
        super().__init__(message)
        self.best_gap = best_gap
        self.iterations = iterations
