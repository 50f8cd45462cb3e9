"""Reproducible spatially-disjoint train/test splits.

Whole cells (or whole trajectories) go to one side, stratified by
quantile buckets of a per-cell statistic so both sides see the full target
range. Selection inside each bucket uses an RNG derived from
(seed, bucket), making manifests byte-identical across runs, input
orderings, and thread counts.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field

import numpy as np

from obsr.hexgrid import CellId, cell_of
from obsr.regionize import RegionDataset
from obsr.trajectory import HexTrajectory

logger = logging.getLogger(__name__)

STRAT_TARGET = "target"
STRAT_POINT_COUNT = "point_count"
STRAT_DURATION = "duration"
STRAT_LENGTH = "length"
_STRAT_SOURCES = (STRAT_TARGET, STRAT_POINT_COUNT, STRAT_DURATION,
                  STRAT_LENGTH)

DEFAULT_TARGET_FRACTION = 0.15


class SplitError(Exception):
    pass


class EmptyInput(SplitError):
    pass


class TooFewCells(SplitError):
    pass


class TooFewTrajectories(SplitError):
    pass


class TooShort(SplitError):
    pass


@dataclass(frozen=True)
class SplitConfig:
    resolution: int
    n_bins: int = 7
    test_fraction: float = 0.2
    seed: int = 0
    strat_source: str = STRAT_TARGET

    def __post_init__(self):
        if self.n_bins < 1:
            raise SplitError(f"n_bins must be >= 1, got {self.n_bins}")
        if not 0.0 < self.test_fraction < 1.0:
            raise SplitError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if not 0 <= self.seed < 2 ** 64:
            raise SplitError("seed must fit in 64 unsigned bits")
        if self.strat_source not in _STRAT_SOURCES:
            raise SplitError(
                f"strat_source {self.strat_source!r} not in {_STRAT_SOURCES}")

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "n_bins": self.n_bins,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "strat_source": self.strat_source,
        }


@dataclass(frozen=True)
class SplitManifest:
    """Train/test membership plus provenance; serializes to stable JSON."""

    train: tuple
    test: tuple
    config: SplitConfig
    bucket_report: tuple = ()

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise SplitError(
                f"train/test overlap on {len(overlap)} ids")
        if self.config.strat_source in (STRAT_TARGET, STRAT_POINT_COUNT):
            for cid in list(self.train) + list(self.test):
                cell = CellId.from_string(cid)
                if cell.resolution != self.config.resolution:
                    raise SplitError(
                        f"cell {cid} not at manifest resolution "
                        f"{self.config.resolution}")

    def to_json(self) -> str:
        payload = {
            "train": list(self.train),
            "test": list(self.test),
            "config": self.config.to_dict(),
            "bucket_report": [dict(b) for b in self.bucket_report],
        }
        return json.dumps(payload, indent=2) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "SplitManifest":
        data = json.loads(text)
        return cls(
            train=tuple(data["train"]),
            test=tuple(data["test"]),
            config=SplitConfig(**data["config"]),
            bucket_report=tuple(data.get("bucket_report", [])),
        )

    @classmethod
    def load(cls, path) -> "SplitManifest":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def bucketize(values, n: int) -> list[int]:
    """Assign each value to one of ``n`` quantile buckets.

    Boundaries sit at empirical quantiles i/n; a value equal to a boundary
    goes to the lower bucket, so populations differ only at ties.
    """
    values = [float(v) for v in values]
    if not values:
        raise EmptyInput("no values to bucketize")
    if any(not np.isfinite(v) for v in values):
        raise SplitError("non-finite stratification value")
    if n == 1:
        return [0] * len(values)
    bounds = np.quantile(values, [i / n for i in range(1, n)])
    return [int(np.searchsorted(bounds, v, side="left"))
            for v in values]


def _select_test(ids_by_bucket: dict, fraction: float, seed: int):
    """Pick test members per bucket: seeded shuffle, round-half-even count,
    then a balance-guarded correction toward the global rounded total."""
    report = []
    test_ids = set()
    sizes = {b: len(ids) for b, ids in ids_by_bucket.items()}
    counts = {}
    for b in sorted(ids_by_bucket):
        size = sizes[b]
        if size == 1:
            counts[b] = 0
            logger.warning(
                "degenerate stratification bucket %d (single member) "
                "assigned to train", b)
            continue
        counts[b] = min(size - 1, round(fraction * size))

    total = sum(sizes.values())
    want_total = round(fraction * total)
    diff = want_total - sum(counts.values())
    # hand out correction units to the largest buckets first, one per pass,
    # never pushing a bucket of >= 20 members outside the 0.05 balance band
    step = 1 if diff > 0 else -1
    by_size = sorted(ids_by_bucket, key=lambda b: (-sizes[b], b))
    while diff != 0:
        progressed = False
        for b in by_size:
            if diff == 0:
                break
            size = sizes[b]
            candidate = counts[b] + step
            if size == 1 or not 0 <= candidate <= size - 1:
                continue
            if size >= 20 and abs(candidate / size - fraction) > 0.05:
                continue
            counts[b] = candidate
            diff -= step
            progressed = True
        if not progressed:
            break

    for b in sorted(ids_by_bucket):
        ids = sorted(ids_by_bucket[b])
        rng = random.Random(f"{seed}:{b}")
        rng.shuffle(ids)
        n_test = counts[b]
        test_ids.update(ids[:n_test])
        size = sizes[b]
        report.append({
            "bucket": b,
            "size": size,
            "test": n_test,
            "achieved_test_fraction": round(n_test / size, 6),
            "degenerate": size == 1,
        })
    return test_ids, report


def split_points(dataset, cfg: SplitConfig) -> SplitManifest:
    """Assign whole cells to train or test, stratified by quantile buckets
    of the per-cell target (or point count when no target exists).

    Accepts a RegionDataset or an iterable of point records (which are
    then assigned to cells at ``cfg.resolution``). Every point of a cell
    follows its cell, so the sides are spatially disjoint.
    """
    if isinstance(dataset, RegionDataset):
        if dataset.resolution != cfg.resolution:
            raise SplitError(
                f"dataset at resolution {dataset.resolution}, config says "
                f"{cfg.resolution}")
        if cfg.strat_source == STRAT_TARGET:
            stats = {c: row.target for c, row in dataset.rows.items()}
        elif cfg.strat_source == STRAT_POINT_COUNT:
            stats = {c: float(row.support) for c, row in dataset.rows.items()}
        else:
            raise SplitError(
                f"strat_source {cfg.strat_source!r} not valid for region "
                "datasets")
    else:
        points = list(dataset)
        if not points:
            raise EmptyInput("no points")
        groups: dict = {}
        for p in points:
            groups.setdefault(cell_of(p.point, cfg.resolution), []).append(p)
        if cfg.strat_source == STRAT_TARGET:
            for cell, grp in groups.items():
                if any(p.target is None for p in grp):
                    raise SplitError(
                        f"cell {cell}: target stratification needs targets")
            stats = {c: sum(p.target for p in grp) / len(grp)
                     for c, grp in groups.items()}
        elif cfg.strat_source == STRAT_POINT_COUNT:
            stats = {c: float(len(grp)) for c, grp in groups.items()}
        else:
            raise SplitError(
                f"strat_source {cfg.strat_source!r} not valid for point "
                "datasets")

    cells = sorted(stats)
    if len(cells) < 2:
        raise TooFewCells(f"need >= 2 cells, got {len(cells)}")
    buckets = bucketize([stats[c] for c in cells], cfg.n_bins)
    ids_by_bucket: dict = {}
    for cell, bucket in zip(cells, buckets):
        ids_by_bucket.setdefault(bucket, []).append(cell.to_string())

    test_ids, report = _select_test(ids_by_bucket, cfg.test_fraction,
                                    cfg.seed)
    all_ids = sorted(c.to_string() for c in cells)
    return SplitManifest(
        train=tuple(i for i in all_ids if i not in test_ids),
        test=tuple(sorted(test_ids)),
        config=cfg,
        bucket_report=tuple(report),
    )


def split_trajectories(trajs, cfg: SplitConfig) -> SplitManifest:
    """Assign whole trajectories to train or test, stratified by total
    travel duration (time-estimation tasks) or by path length in cells
    (mobility tasks)."""
    trajs = list(trajs)
    if len(trajs) < 2:
        raise TooFewTrajectories(f"need >= 2 trajectories, got {len(trajs)}")
    if cfg.strat_source == STRAT_DURATION:
        stats = {t.id: float(t.duration_s) for t in trajs}
    elif cfg.strat_source == STRAT_LENGTH:
        stats = {t.id: float(len(t.cells)) for t in trajs}
    else:
        raise SplitError(
            f"strat_source {cfg.strat_source!r} not valid for trajectories")
    if len(stats) != len(trajs):
        raise SplitError("duplicate trajectory ids")

    ids = sorted(stats)
    buckets = bucketize([stats[i] for i in ids], cfg.n_bins)
    ids_by_bucket: dict = {}
    for tid, bucket in zip(ids, buckets):
        ids_by_bucket.setdefault(bucket, []).append(tid)

    test_ids, report = _select_test(ids_by_bucket, cfg.test_fraction,
                                    cfg.seed)
    return SplitManifest(
        train=tuple(i for i in ids if i not in test_ids),
        test=tuple(sorted(test_ids)),
        config=cfg,
        bucket_report=tuple(report),
    )


@dataclass(frozen=True)
class SegmentedTrajectory:
    """A trajectory cut into an input prefix and a to-predict suffix."""

    id: str
    X: HexTrajectory
    Y: tuple  # of CellId
    target_fraction: float = DEFAULT_TARGET_FRACTION


def segment_xy(t: HexTrajectory,
               target_fraction: float = DEFAULT_TARGET_FRACTION
               ) -> SegmentedTrajectory:
    """Cut the final ``max(1, floor(fraction * len))`` cells off as the
    prediction target; the prefix stays non-empty."""
    n = len(t.cells)
    if n < 2:
        raise TooShort(f"{t.id}: cannot segment {n} cells")
    # epsilon guards the floor against 0.15 * n landing just under an integer
    n_y = max(1, int(target_fraction * n + 1e-9))
    n_x = n - n_y
    prefix = HexTrajectory(
        id=t.id,
        cells=t.cells[:n_x],
        times=None if t.times is None else t.times[:n_x],
        duration_s=t.duration_s,
        meta=dict(t.meta),
    )
    return SegmentedTrajectory(id=t.id, X=prefix, Y=t.cells[n_x:],
                               target_fraction=target_fraction)
