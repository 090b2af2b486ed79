"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Configuration values are out of range or mutually inconsistent."""


class UsageError(ValueError):
    """An operation was called with inputs that violate its contract."""
