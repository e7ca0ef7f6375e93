"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition.

    Subclasses ValueError so callers that catch the builtin still work,
    while the CLI can distinguish bad input (exit 1) from I/O trouble.
    """
