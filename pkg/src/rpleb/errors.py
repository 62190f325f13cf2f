"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Malformed arguments: dimension mismatch, non-finite coordinates, bad parameters."""


class NoNeighborError(ValueError):
    """Raised when a nearest-neighbor question has no candidate to answer with."""


class DegenerateLadderError(ValueError):
    """All points coincide, so no radius ladder can be built."""


class NoNeighborInRangeError(LookupError):
    """The top rung of a radius ladder answered NO for this query."""
