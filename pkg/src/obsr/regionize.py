"""Aggregate point records into per-cell region targets: mean-value
surfaces (price tasks) and max-normalized intensity surfaces (count tasks),
at one or several grid resolutions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from obsr.hexgrid import CellId, InvalidResolution, cell_of

MIN_REGION_RESOLUTION = 6
MAX_REGION_RESOLUTION = 11

MEAN_VALUE = "mean_value"
INTENSITY = "intensity"


class RegionizeError(Exception):
    pass


class EmptyInput(RegionizeError):
    pass


class MissingTarget(RegionizeError):
    pass


class RegionRow(NamedTuple):
    target: float
    support: int


@dataclass
class RegionDataset:
    """Cell -> target table at one resolution; the region-task instance."""

    resolution: int
    rows: dict  # CellId -> RegionRow
    target_kind: str
    normalization: dict | None = None  # {"max_count": int} for intensity

    def __post_init__(self):
        if self.target_kind not in (MEAN_VALUE, INTENSITY):
            raise RegionizeError(f"unknown target kind {self.target_kind!r}")
        for cell, row in self.rows.items():
            if cell.resolution != self.resolution:
                raise RegionizeError(
                    f"cell {cell} not at resolution {self.resolution}")
            if row.support < 1:
                raise RegionizeError(f"cell {cell}: support must be >= 1")
            if not math.isfinite(row.target):
                raise RegionizeError(f"cell {cell}: non-finite target")
            if self.target_kind == INTENSITY and not 0.0 < row.target <= 1.0:
                raise RegionizeError(
                    f"cell {cell}: intensity {row.target} outside (0, 1]")

    def __len__(self):
        return len(self.rows)

    def cells(self):
        return sorted(self.rows)

    def targets(self):
        return [self.rows[c].target for c in self.cells()]

    def total_support(self) -> int:
        return sum(row.support for row in self.rows.values())

    def to_csv(self, path, sidecar: bool = True):
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("cell,target,support\n")
            for cell in self.cells():
                row = self.rows[cell]
                f.write(f"{cell.to_string()},{row.target:.10g},{row.support}\n")
        if sidecar:
            meta = {
                "resolution": self.resolution,
                "target_kind": self.target_kind,
                "normalization": self.normalization,
            }
            with open(path.with_suffix(path.suffix + ".json"), "w",
                      encoding="utf-8") as f:
                json.dump(meta, f, indent=2, sort_keys=True)
                f.write("\n")

    @classmethod
    def from_csv(cls, path) -> "RegionDataset":
        path = Path(path)
        with open(path.with_suffix(path.suffix + ".json"),
                  encoding="utf-8") as f:
            meta = json.load(f)
        rows = {}
        with open(path, encoding="utf-8") as f:
            header = f.readline().strip()
            if header != "cell,target,support":
                raise RegionizeError(f"{path}: unexpected header {header!r}")
            for line in f:
                cell_s, target_s, support_s = line.strip().split(",")
                rows[CellId.from_string(cell_s)] = RegionRow(
                    float(target_s), int(support_s))
        return cls(resolution=meta["resolution"], rows=rows,
                   target_kind=meta["target_kind"],
                   normalization=meta.get("normalization"))


def _check_region_resolution(r):
    if not isinstance(r, int) or not \
            MIN_REGION_RESOLUTION <= r <= MAX_REGION_RESOLUTION:
        raise InvalidResolution(
            f"region resolution {r!r} outside "
            f"[{MIN_REGION_RESOLUTION}, {MAX_REGION_RESOLUTION}]")


def _group_by_cell(points, r):
    groups: dict = {}
    for p in points:
        cell = cell_of(p.point, r)
        groups.setdefault(cell, []).append(p)
    return groups


def aggregate_mean(points, r: int) -> RegionDataset:
    """Per-cell arithmetic mean of point targets; support = point count.

    Cells with no points are absent rather than zero-filled.
    """
    _check_region_resolution(r)
    points = list(points)
    if not points:
        raise EmptyInput("no points to aggregate")
    for p in points:
        if p.target is None or not math.isfinite(p.target):
            raise MissingTarget(f"point {p.id} has no finite target")
    rows = {}
    for cell, group in _group_by_cell(points, r).items():
        rows[cell] = RegionRow(
            sum(p.target for p in group) / len(group), len(group))
    return RegionDataset(resolution=r, rows=rows, target_kind=MEAN_VALUE)


def aggregate_intensity(points, r: int,
                        max_count: int | None = None) -> RegionDataset:
    """Per-cell event count divided by the maximum per-cell count.

    By default the maximum is taken over this point set (whole-dataset
    normalization); pass ``max_count`` to normalize against an externally
    fixed maximum (e.g. one computed on the training side only). The
    divisor is recorded under ``normalization`` for invertibility.
    """
    _check_region_resolution(r)
    points = list(points)
    if not points:
        raise EmptyInput("no points to aggregate")
    counts = {cell: len(group)
              for cell, group in _group_by_cell(points, r).items()}
    observed_max = max(counts.values())
    divisor = observed_max if max_count is None else int(max_count)
    if divisor < 1:
        raise RegionizeError(f"max_count must be >= 1, got {divisor}")
    rows = {cell: RegionRow(min(n / divisor, 1.0), n)
            for cell, n in counts.items()}
    return RegionDataset(resolution=r, rows=rows, target_kind=INTENSITY,
                         normalization={"max_count": divisor})


def multi_resolution(points, resolutions, kind: str) -> dict:
    """One RegionDataset per resolution from the same point set, with
    independent normalizations."""
    resolutions = list(resolutions)
    if not resolutions:
        raise EmptyInput("no resolutions requested")
    for r in resolutions:
        _check_region_resolution(r)
    agg = {MEAN_VALUE: aggregate_mean, INTENSITY: aggregate_intensity}
    if kind not in agg:
        raise RegionizeError(f"unknown target kind {kind!r}")
    points = list(points)
    return {r: agg[kind](points, r) for r in resolutions}
