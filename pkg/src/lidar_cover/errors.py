"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class InfeasibleError(ValueError):
    """Raised when a coverage instance has street points no sensor can cover."""

    def __init__(self, message, street_ids=()):
        super().__init__(message)
        self.street_ids = tuple(street_ids)


class NumericError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""
