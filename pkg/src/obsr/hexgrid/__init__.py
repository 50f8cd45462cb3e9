"""Hierarchical hexagonal grid (H3-compatible): indexing, neighborhoods,
distances, shortest paths, centroids, and relative direction labels.

All operations are pure functions over immutable values and are safe to
call concurrently. Cell indexes serialize as 15-character lowercase
hexadecimal strings (e.g. ``"8928308280fffff"``) in every file format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

from obsr.hexgrid import _core
from obsr.hexgrid.errors import (
    DistanceUndefined,
    HexGridError,
    InvalidCell,
    InvalidCoordinate,
    InvalidResolution,
    NotAdjacent,
    PathUndefined,
    PentagonEncountered,
    PentagonNeighborhood,
    ResolutionMismatch,
)

__all__ = [
    "GeoPoint",
    "CellId",
    "DirectionLabel",
    "cell_of",
    "centroid",
    "cell_boundary",
    "ring",
    "disk",
    "grid_distance",
    "grid_path",
    "direction_between",
    "neighbor_in_direction",
    "opposite_direction",
    "parent",
    "pentagons",
    "HexGridError",
    "InvalidCoordinate",
    "InvalidResolution",
    "InvalidCell",
    "ResolutionMismatch",
    "PentagonEncountered",
    "PentagonNeighborhood",
    "NotAdjacent",
    "DistanceUndefined",
    "PathUndefined",
]

MIN_RESOLUTION = 0
MAX_RESOLUTION = 15


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A WGS84 coordinate pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidCoordinate(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidCoordinate(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidCoordinate(f"longitude {self.lon} outside [-180, 180]")


class CellId(int):
    """A 64-bit hierarchical grid cell index.

    Validates on construction; use :meth:`from_string` for the hexadecimal
    wire form.
    """

    __slots__ = ()

    def __new__(cls, index):
        h = int(index)
        if not _core.is_valid_cell(h):
            raise InvalidCell(f"{h:#x} is not a valid cell index")
        return super().__new__(cls, h)

    @classmethod
    def _wrap(cls, h: int) -> "CellId":
        # fast path for indexes produced by the grid core (always valid)
        return int.__new__(cls, h)

    @classmethod
    def from_string(cls, s: str) -> "CellId":
        return cls(_core.string_to_h3(s))

    def to_string(self) -> str:
        return _core.h3_to_string(self)

    @property
    def resolution(self) -> int:
        return _core.get_resolution(self)

    @property
    def is_pentagon(self) -> bool:
        return _core.is_pentagon(self)

    def __repr__(self) -> str:
        return f"CellId({self.to_string()!r})"

    def __str__(self) -> str:
        return self.to_string()


class DirectionLabel(IntEnum):
    """The six neighbor slots of a hexagon, in the grid standard's canonical
    axial-digit order. The same label corresponds to the same geographic
    bearing across a (distortion-free) region of the grid."""

    K = 0
    J = 1
    JK = 2
    I = 3  # noqa: E741
    IK = 4
    IJ = 5


def opposite_direction(d: DirectionLabel) -> DirectionLabel:
    """The label pointing back: stepping d then opposite(d) returns home."""
    return DirectionLabel(5 - int(d))


def _check_resolution(r: int) -> None:
    if not isinstance(r, int) or not MIN_RESOLUTION <= r <= MAX_RESOLUTION:
        raise InvalidResolution(
            f"resolution {r!r} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")


def cell_of(p: GeoPoint, r: int) -> CellId:
    """The unique cell at resolution ``r`` containing point ``p``."""
    _check_resolution(r)
    if not isinstance(p, GeoPoint):
        p = GeoPoint(*p)
    h = _core.lat_lng_to_cell(math.radians(p.lat), math.radians(p.lon), r)
    return CellId._wrap(h)


@lru_cache(maxsize=1 << 18)
def _centroid_raw(h: int):
    lat, lng = _core.cell_to_lat_lng(h)
    return math.degrees(lat), math.degrees(lng)


def centroid(c: CellId) -> GeoPoint:
    """Geographic center of a cell."""
    if not _core.is_valid_cell(c):
        raise InvalidCell(f"{int(c):#x} is not a valid cell index")
    lat, lon = _centroid_raw(int(c))
    return GeoPoint(lat, lon)


def cell_boundary(c: CellId) -> list[GeoPoint]:
    """Vertices of the cell's hexagonal boundary, counterclockwise (open
    ring: first vertex is not repeated)."""
    if not _core.is_valid_cell(c):
        raise InvalidCell(f"{int(c):#x} is not a valid cell index")
    return [GeoPoint(math.degrees(lat), math.degrees(lng))
            for lat, lng in _core.cell_to_boundary(int(c))]


def ring(c: CellId, k: int) -> list[CellId]:
    """Hollow ring of cells at exact grid distance ``k``; ``ring(c, 0) == [c]``.

    Raises PentagonEncountered when the ring crosses a pentagon distortion;
    callers may fall back to a disk difference.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return [CellId._wrap(h) for h in _core.grid_ring_unsafe(int(c), k)]


def disk(c: CellId, k: int) -> list[CellId]:
    """All cells at grid distance <= ``k``, ordered by distance then index.

    Always defined: falls back to breadth-first traversal near pentagons.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    by_dist = _core.grid_disk(int(c), k)
    return [CellId._wrap(h)
            for h in sorted(by_dist, key=lambda h: (by_dist[h], h))]


def grid_distance(a: CellId, b: CellId) -> int:
    """Minimal number of neighbor steps between two same-resolution cells."""
    if _core.get_resolution(a) != _core.get_resolution(b):
        raise ResolutionMismatch(
            f"resolutions differ: {_core.get_resolution(a)} vs "
            f"{_core.get_resolution(b)}")
    return _core.grid_distance(int(a), int(b))


def grid_path(a: CellId, b: CellId) -> list[CellId]:
    """Deterministic shortest path from ``a`` to ``b``, inclusive.

    Consecutive cells are neighbors and the length is
    ``grid_distance(a, b) + 1``. Ties between equally short paths break by
    linear interpolation in the local IJ frame anchored at ``a``.
    """
    if _core.get_resolution(a) != _core.get_resolution(b):
        raise ResolutionMismatch(
            f"resolutions differ: {_core.get_resolution(a)} vs "
            f"{_core.get_resolution(b)}")
    try:
        return [CellId._wrap(h) for h in _core.grid_path_cells(int(a), int(b))]
    except DistanceUndefined as e:
        raise PathUndefined(str(e)) from e


def direction_between(a: CellId, b: CellId) -> DirectionLabel:
    """Label of the canonical neighbor slot of ``a`` occupied by ``b``."""
    if _core.is_pentagon(a) or _core.is_pentagon(b):
        raise PentagonNeighborhood(
            "direction labels are undefined at a pentagon")
    digit = _core.direction_for_neighbor(int(a), int(b))
    if digit == _core.INVALID_DIGIT or digit == _core.CENTER_DIGIT:
        raise NotAdjacent(
            f"{a.to_string()} and {CellId._wrap(int(b)).to_string()} "
            "are not neighbors")
    return DirectionLabel(digit - 1)


def neighbor_in_direction(c: CellId, d: DirectionLabel) -> CellId:
    """The unique neighbor of ``c`` in slot ``d``; inverse of
    :func:`direction_between`."""
    if _core.is_pentagon(c):
        raise PentagonNeighborhood("pentagons have a missing neighbor slot")
    d = DirectionLabel(d)
    try:
        h, _ = _core.neighbor_rotations(int(c), int(d) + 1, 0)
    except PentagonEncountered as e:
        raise PentagonNeighborhood(str(e)) from e
    return CellId._wrap(h)


def parent(c: CellId, parent_res: int) -> CellId:
    """Ancestor of ``c`` at a coarser resolution."""
    _check_resolution(parent_res)
    return CellId._wrap(_core.cell_to_parent(int(c), parent_res))


def pentagons(r: int) -> list[CellId]:
    """The twelve pentagonal cells at resolution ``r``."""
    _check_resolution(r)
    return [CellId._wrap(h) for h in _core.get_pentagons(r)]
