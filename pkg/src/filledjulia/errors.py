"""Exception types shared across the package."""

from .dyadic import DyadicOverflowError


class ResourceError(RuntimeError):
    """A configured budget (degree cap, precision, subdivision depth) ran out."""


class BoundaryAmbiguityError(ResourceError):
    """A root sits on (or too near) a region boundary at the resolution limit.

    Inflating or shifting the search region usually resolves it.
    """


class PreconditionError(ValueError):
    """An operation was called outside its contract."""


__all__ = ["ResourceError", "BoundaryAmbiguityError", "PreconditionError", "DyadicOverflowError"]
