"""GPS trajectories onto the hex grid: hexification with duplicate
collapsing, shortest-path gap interpolation with timestamp imputation, and
relative-direction class encoding/decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from obsr.hexgrid import (
    CellId,
    DirectionLabel,
    cell_of,
    direction_between,
    grid_distance,
    grid_path,
    neighbor_in_direction,
)

# beyond this many cells, a gap is treated as an outage rather than a path
# worth fabricating (~4.5 km at resolution 9)
DEFAULT_MAX_GAP = 25


class TrajectoryError(Exception):
    pass


class TooShort(TrajectoryError):
    pass


class NotContiguous(TrajectoryError):
    pass


class GapTooLarge(TrajectoryError):
    pass


@dataclass(frozen=True)
class HexTrajectory:
    """A grid-snapped path: ordered cells, optional aligned timestamps, the
    source trajectory's duration. After preparation, consecutive cells are
    distinct neighbors."""

    id: str
    cells: tuple
    times: tuple | None = None
    duration_s: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.cells:
            raise TrajectoryError(f"{self.id}: empty cell sequence")
        res = self.cells[0].resolution
        if any(c.resolution != res for c in self.cells):
            raise TrajectoryError(f"{self.id}: mixed resolutions")
        if self.times is not None:
            if len(self.times) != len(self.cells):
                raise TrajectoryError(
                    f"{self.id}: {len(self.times)} times for "
                    f"{len(self.cells)} cells")
            if any(b < a for a, b in zip(self.times, self.times[1:])):
                raise TrajectoryError(f"{self.id}: timestamps decrease")

    def __len__(self):
        return len(self.cells)

    @property
    def resolution(self) -> int:
        return self.cells[0].resolution

    def is_contiguous(self) -> bool:
        return all(grid_distance(a, b) == 1
                   for a, b in zip(self.cells, self.cells[1:]))


def hexify(traj, r: int) -> HexTrajectory:
    """Map each GPS sample to its cell and collapse consecutive duplicates,
    keeping the first timestamp of each run.

    The duration is the raw trajectory's time span, independent of how many
    cells survive collapsing. Raises TooShort when everything collapses
    into a single cell.
    """
    if len(traj.samples) < 2:
        raise TooShort(f"{traj.id}: fewer than 2 samples")
    cells = []
    times = []
    for point, t in traj.samples:
        cell = cell_of(point, r)
        if cells and cell == cells[-1]:
            continue
        cells.append(cell)
        times.append(t)
    if len(cells) < 2:
        raise TooShort(f"{traj.id}: collapses to a single cell")
    return HexTrajectory(
        id=traj.id,
        cells=tuple(cells),
        times=tuple(times),
        duration_s=traj.samples[-1][1] - traj.samples[0][1],
        meta=dict(traj.meta),
    )


def interpolate_gaps(h: HexTrajectory,
                     max_gap: int = DEFAULT_MAX_GAP) -> HexTrajectory:
    """Splice shortest grid paths into every gap, producing a contiguous
    path. Idempotent on already-contiguous input.

    Inserted cells receive timestamps by linear interpolation between the
    bracketing known times. A gap longer than ``max_gap`` raises
    GapTooLarge; see :func:`split_on_gaps` for the splitting alternative.
    """
    cells = [h.cells[0]]
    times = None if h.times is None else [h.times[0]]
    for idx in range(1, len(h.cells)):
        prev = h.cells[idx - 1]
        cur = h.cells[idx]
        d = grid_distance(prev, cur)
        if d == 0:
            continue  # defensive: collapse again rather than fail encoding
        if d > max_gap:
            raise GapTooLarge(
                f"{h.id}: gap of {d} cells at position {idx} exceeds "
                f"{max_gap}")
        if d > 1:
            path = grid_path(prev, cur)
            cells.extend(path[1:-1])
            if times is not None:
                t0 = h.times[idx - 1]
                t1 = h.times[idx]
                times.extend(t0 + (t1 - t0) * j / d for j in range(1, d))
        cells.append(cur)
        if times is not None:
            times.append(h.times[idx])
    return replace(h, cells=tuple(cells),
                   times=None if times is None else tuple(times))


def split_on_gaps(h: HexTrajectory,
                  max_gap: int = DEFAULT_MAX_GAP) -> list[HexTrajectory]:
    """Split a trajectory at gaps longer than ``max_gap`` and interpolate
    the rest; pieces get ids ``"<id>#0"``, ``"<id>#1"``, ...

    Pieces shorter than 2 cells are discarded. Returns interpolated,
    contiguous trajectories (possibly none).
    """
    pieces = []
    start = 0
    for idx in range(1, len(h.cells)):
        if grid_distance(h.cells[idx - 1], h.cells[idx]) > max_gap:
            pieces.append((start, idx))
            start = idx
    pieces.append((start, len(h.cells)))

    if len(pieces) == 1:
        return [interpolate_gaps(h, max_gap=max_gap)]

    out = []
    n = 0
    for lo, hi in pieces:
        if hi - lo < 2:
            continue
        piece = HexTrajectory(
            id=f"{h.id}#{n}",
            cells=h.cells[lo:hi],
            times=None if h.times is None else h.times[lo:hi],
            duration_s=(0.0 if h.times is None
                        else h.times[hi - 1] - h.times[lo]),
            meta=dict(h.meta),
        )
        out.append(interpolate_gaps(piece, max_gap=max_gap))
        n += 1
    return out


def encode_directions(h: HexTrajectory) -> list[DirectionLabel]:
    """Class labels of each step relative to its predecessor; length is
    ``len(cells) - 1``. Requires a contiguous path."""
    labels = []
    for a, b in zip(h.cells, h.cells[1:]):
        if grid_distance(a, b) != 1:
            raise NotContiguous(
                f"{h.id}: cells {a} -> {b} are {grid_distance(a, b)} apart; "
                "interpolate gaps first")
        labels.append(direction_between(a, b))
    return labels


def decode_directions(start: CellId, labels) -> list[CellId]:
    """Replay direction labels from a starting cell; inverse of
    :func:`encode_directions`."""
    cells = [start]
    for label in labels:
        cells.append(neighbor_in_direction(cells[-1], DirectionLabel(label)))
    return cells


def prepare_trajectories(trajs, r: int, max_gap: int = DEFAULT_MAX_GAP,
                         split_oversize_gaps: bool = True):
    """Hexify + interpolate a batch; returns (prepared list, drop reasons).

    Trajectories that collapse to one cell are dropped and counted;
    over-large gaps either split the trajectory or drop it.
    """
    prepared = []
    reasons: dict = {}
    for traj in trajs:
        try:
            h = hexify(traj, r)
        except TooShort:
            reasons["too_short"] = reasons.get("too_short", 0) + 1
            continue
        if split_oversize_gaps:
            prepared.extend(split_on_gaps(h, max_gap=max_gap))
        else:
            try:
                prepared.append(interpolate_gaps(h, max_gap=max_gap))
            except GapTooLarge:
                reasons["gap_too_large"] = reasons.get("gap_too_large", 0) + 1
    prepared.sort(key=lambda h: h.id)
    return prepared, reasons
