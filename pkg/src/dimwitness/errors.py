"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Shapes of expressions, vectors or matrices do not agree."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RankError(ValueError):
    """A Gram matrix cannot be factored in the requested dimension."""


class CapacityError(ValueError):
    """A request exceeds a hard-coded enumeration or matrix-size cap."""


class NumericalError(ArithmeticError):
    """Round-off exceeded the tolerated slack."""
