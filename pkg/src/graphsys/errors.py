"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant."""


class ScaleGuardError(RuntimeError):
    """Raised when an exact computation is refused because the instance is too large."""
