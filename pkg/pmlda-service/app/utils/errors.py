class InputError(ValueError):
    """Raised for any invalid input: shapes, off-simplex vectors, bad config, unreadable files."""


class NumericalFailure(ArithmeticError):
    """Raised when a computation leaves the finite domain (e.g. a NaN log joint)."""
