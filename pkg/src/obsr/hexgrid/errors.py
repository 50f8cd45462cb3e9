"""Errors raised by hexagonal grid operations."""


class HexGridError(Exception):
    """Base class for grid errors."""


class InvalidCoordinate(HexGridError):
    """Latitude/longitude outside the valid domain, or not finite."""


class InvalidResolution(HexGridError):
    """Resolution outside the grid's supported range."""


class InvalidCell(HexGridError):
    """Index fails the grid standard's validity predicate."""


class ResolutionMismatch(HexGridError):
    """Operation requires both cells at the same resolution."""


class PentagonEncountered(HexGridError):
    """Traversal touched one of the grid's 12 pentagons per resolution."""


class PentagonNeighborhood(PentagonEncountered):
    """A pentagon's missing neighbor slot makes the operation undefined."""


class NotAdjacent(HexGridError):
    """Cells are not at grid distance 1."""


class DistanceUndefined(HexGridError):
    """Pair cannot be placed in one local coordinate frame."""


class PathUndefined(DistanceUndefined):
    """No deterministic shortest path could be produced."""
