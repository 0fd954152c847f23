"""Exception hierarchy shared across the package."""


class DespeckleError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(DespeckleError, ValueError):
    """An argument is outside its documented range or combination."""


class DomainError(DespeckleError, ValueError):
    """A numeric input violates a mathematical precondition (e.g. z <= 0)."""


class OutOfBoundsError(DespeckleError, IndexError):
    """A pixel coordinate falls outside the raster."""


class FormatError(DespeckleError, ValueError):
    """A raster file is malformed or inconsistent."""


class DegenerateRegionError(DespeckleError, ValueError):
    """A pixel region is constant where variability is required."""
