"""Loaders for the benchmark's input formats: point CSVs with configurable
column bindings, polyline trip CSVs, PLT trajectory directories, and
ID-list split manifests for license-restricted datasets.

Loading is lossless modulo reported drops: every input row either becomes
a record or increments the drop counter. Output ordering is by id, so
re-ingesting a file is byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from obsr.hexgrid import GeoPoint, InvalidCoordinate

PORTO_SAMPLE_INTERVAL_S = 15.0

# lat/lon box used to filter PLT points; a configuration default covering
# the Beijing metropolitan area, not a fidelity claim
DEFAULT_PLT_BBOX = (39.4, 115.4, 41.1, 117.6)


class IngestError(Exception):
    pass


class FileNotFound(IngestError):
    pass


class HeaderMismatch(IngestError):
    pass


class EmptyDataset(IngestError):
    pass


class DuplicateIds(IngestError):
    pass


class MalformedPolyline(IngestError):
    pass


class MalformedPlt(IngestError):
    pass


class EmptyAfterFilter(IngestError):
    pass


class UnknownIds(IngestError):
    pass


class EmptySplit(IngestError):
    pass


@dataclass(frozen=True)
class PointRecord:
    id: str
    point: GeoPoint
    timestamp: float | None = None
    target: float | None = None
    features: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Trajectory:
    """A timestamped GPS sequence. At least two samples; times non-decreasing."""

    id: str
    samples: tuple  # of (GeoPoint, utc_seconds)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError(f"trajectory {self.id}: needs >= 2 samples")
        times = [t for _, t in self.samples]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError(f"trajectory {self.id}: timestamps decrease")

    @property
    def duration_s(self) -> float:
        return self.samples[-1][1] - self.samples[0][1]


@dataclass(frozen=True)
class RawDatasetDescriptor:
    format: str  # point_csv | porto_polyline_csv | geolife_plt_dir
    path: str
    columns: dict = field(default_factory=dict)  # role -> column name
    bbox: tuple | None = None  # (lat_min, lon_min, lat_max, lon_max)

    FORMATS = ("point_csv", "porto_polyline_csv", "geolife_plt_dir")

    def __post_init__(self):
        if self.format not in self.FORMATS:
            raise IngestError(
                f"unknown format {self.format!r}; expected one of "
                f"{self.FORMATS}")


@dataclass
class LoadResult:
    """Records plus the count of input rows that were dropped and why."""

    records: list
    dropped: int
    drop_reasons: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def _drop(reasons: dict, why: str):
    reasons[why] = reasons.get(why, 0) + 1


def _parse_float(text):
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    if v != v or v in (float("inf"), float("-inf")):
        return None
    return v


def load_points(desc: RawDatasetDescriptor) -> LoadResult:
    """Parse a point CSV into records using the descriptor's column bindings.

    Required roles: id, lat, lon. Optional: target, timestamp. Unbound
    columns are kept as features (numeric when parseable). Rows with
    unparseable coordinates, a bound-but-unparseable target, or missing
    required fields are dropped and counted.
    """
    path = Path(desc.path)
    if not path.is_file():
        raise FileNotFound(str(path))
    cols = desc.columns
    for role in ("id", "lat", "lon"):
        if role not in cols:
            raise HeaderMismatch(f"column binding for role {role!r} missing")

    records = []
    reasons: dict = {}
    seen_ids = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        bound = set(cols.values())
        missing = bound - set(header)
        if missing:
            raise HeaderMismatch(
                f"bound columns not in header: {sorted(missing)}; header has "
                f"{header}")
        for row in reader:
            rid = (row.get(cols["id"]) or "").strip()
            if not rid:
                _drop(reasons, "missing_id")
                continue
            if rid in seen_ids:
                raise DuplicateIds(f"duplicate record id {rid!r}")
            lat = _parse_float(row.get(cols["lat"]))
            lon = _parse_float(row.get(cols["lon"]))
            if lat is None or lon is None:
                _drop(reasons, "bad_coordinate")
                continue
            try:
                point = GeoPoint(lat, lon)
            except InvalidCoordinate:
                _drop(reasons, "bad_coordinate")
                continue
            if desc.bbox is not None and not _in_bbox(point, desc.bbox):
                _drop(reasons, "outside_bbox")
                continue
            target = None
            if "target" in cols:
                target = _parse_float(row.get(cols["target"]))
                if target is None:
                    _drop(reasons, "bad_target")
                    continue
            timestamp = None
            if "timestamp" in cols:
                timestamp = _parse_float(row.get(cols["timestamp"]))
            features = {}
            for name, value in row.items():
                if name in bound or name is None:
                    continue
                num = _parse_float(value)
                features[name] = num if num is not None else value
            seen_ids.add(rid)
            records.append(PointRecord(id=rid, point=point,
                                       timestamp=timestamp, target=target,
                                       features=features))
    if not records:
        raise EmptyDataset(f"{path}: no valid rows")
    records.sort(key=lambda r: r.id)
    return LoadResult(records, sum(reasons.values()), reasons)


def _in_bbox(p: GeoPoint, bbox) -> bool:
    lat_min, lon_min, lat_max, lon_max = bbox
    return lat_min <= p.lat <= lat_max and lon_min <= p.lon <= lon_max


def load_porto_trips(desc: RawDatasetDescriptor) -> LoadResult:
    """Parse trips whose geometry is a bracketed [lon, lat] polyline sampled
    at a fixed 15 s cadence.

    Per-point timestamps are synthesized as start_time + 15 * i; the
    [lon, lat] pair order is swapped into GeoPoint(lat, lon). Trips with
    fewer than two valid points are dropped and counted.
    """
    path = Path(desc.path)
    if not path.is_file():
        raise FileNotFound(str(path))
    cols = desc.columns
    id_col = cols.get("id", "TRIP_ID")
    poly_col = cols.get("polyline", "POLYLINE")
    time_col = cols.get("start_time", "TIMESTAMP")

    trajectories = []
    reasons: dict = {}
    seen_ids = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        need = {id_col, poly_col}
        if need - set(header):
            raise HeaderMismatch(
                f"columns {sorted(need - set(header))} not in header {header}")
        for row in reader:
            rid = (row.get(id_col) or "").strip()
            if not rid:
                _drop(reasons, "missing_id")
                continue
            if rid in seen_ids:
                raise DuplicateIds(f"duplicate trip id {rid!r}")
            start = _parse_float(row.get(time_col)) or 0.0
            try:
                pairs = json.loads(row.get(poly_col) or "")
            except json.JSONDecodeError:
                _drop(reasons, "malformed_polyline")
                continue
            if not isinstance(pairs, list):
                _drop(reasons, "malformed_polyline")
                continue
            samples = []
            ok = True
            for i, pair in enumerate(pairs):
                if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                        or _parse_float(pair[0]) is None
                        or _parse_float(pair[1]) is None):
                    ok = False
                    break
                lon, lat = float(pair[0]), float(pair[1])
                try:
                    point = GeoPoint(lat, lon)
                except InvalidCoordinate:
                    ok = False
                    break
                samples.append((point, start + PORTO_SAMPLE_INTERVAL_S * i))
            if not ok:
                _drop(reasons, "malformed_polyline")
                continue
            if len(samples) < 2:
                _drop(reasons, "too_short")
                continue
            seen_ids.add(rid)
            trajectories.append(
                Trajectory(id=rid, samples=tuple(samples),
                           meta={"start_time": str(start)}))
    if not trajectories:
        raise EmptyDataset(f"{path}: no usable trips")
    trajectories.sort(key=lambda t: t.id)
    return LoadResult(trajectories, sum(reasons.values()), reasons)


def load_geolife(desc: RawDatasetDescriptor) -> LoadResult:
    """Parse a directory tree of PLT files (6 header lines, then
    ``lat,lon,_,alt,days,date,time`` rows), one trajectory per file.

    Points outside the descriptor's bounding box (default: Beijing) are
    filtered; files left with fewer than two points are dropped and
    counted. Raises EmptyAfterFilter when nothing survives.
    """
    root = Path(desc.path)
    if not root.is_dir():
        raise FileNotFound(str(root))
    bbox = desc.bbox or DEFAULT_PLT_BBOX

    trajectories = []
    reasons: dict = {}
    files = sorted(root.rglob("*.plt"))
    if not files:
        raise EmptyDataset(f"{root}: no .plt files")
    for plt in files:
        rid = _plt_trajectory_id(root, plt)
        try:
            samples = _parse_plt(plt, bbox)
        except MalformedPlt:
            _drop(reasons, "malformed_plt")
            continue
        if len(samples) < 2:
            _drop(reasons, "empty_after_filter")
            continue
        times = [t for _, t in samples]
        if any(b < a for a, b in zip(times, times[1:])):
            _drop(reasons, "non_monotone_time")
            continue
        trajectories.append(
            Trajectory(id=rid, samples=tuple(samples),
                       meta={"source": plt.name}))
    if not trajectories:
        raise EmptyAfterFilter(f"{root}: no trajectories inside bbox {bbox}")
    trajectories.sort(key=lambda t: t.id)
    return LoadResult(trajectories, sum(reasons.values()), reasons)


def _plt_trajectory_id(root: Path, plt: Path) -> str:
    # conventional layout is <user>/Trajectory/<timestamp>.plt; the id pairs
    # the user directory with the file stem so it survives re-rooting
    if plt.parent == root:
        return plt.stem
    if plt.parent.name.lower() == "trajectory":
        return f"{plt.parent.parent.name}/{plt.stem}"
    return f"{plt.parent.name}/{plt.stem}"


def _parse_plt(path: Path, bbox) -> list:
    samples = []
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if len(lines) < 6:
        raise MalformedPlt(f"{path}: fewer than 6 header lines")
    for line in lines[6:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) < 7:
            raise MalformedPlt(f"{path}: short row {line!r}")
        lat = _parse_float(parts[0])
        lon = _parse_float(parts[1])
        if lat is None or lon is None:
            raise MalformedPlt(f"{path}: bad coordinates {line!r}")
        try:
            point = GeoPoint(lat, lon)
        except InvalidCoordinate:
            raise MalformedPlt(f"{path}: out-of-range coordinates {line!r}")
        try:
            dt = datetime.strptime(f"{parts[5].strip()} {parts[6].strip()}",
                                   "%Y-%m-%d %H:%M:%S")
        except ValueError:
            raise MalformedPlt(f"{path}: bad date/time {line!r}")
        if not _in_bbox(point, bbox):
            continue
        samples.append((point, dt.replace(tzinfo=timezone.utc).timestamp()))
    return samples


@dataclass(frozen=True)
class IdManifest:
    """Train/test membership as id lists, the exchange format for
    license-restricted datasets."""

    train: tuple
    test: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise EmptySplit(
                f"train and test overlap on {len(overlap)} ids, e.g. "
                f"{sorted(overlap)[:3]}")
        if not self.train or not self.test:
            raise EmptySplit("manifest has an empty side")


def load_id_manifest(path) -> IdManifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFound(str(path))
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    for key in ("train", "test"):
        if key not in data or not isinstance(data[key], list):
            raise HeaderMismatch(f"id manifest missing list field {key!r}")
    return IdManifest(train=tuple(str(i) for i in data["train"]),
                      test=tuple(str(i) for i in data["test"]),
                      meta=data.get("meta", {}))


def apply_id_manifest(items, manifest, strict: bool = True):
    """Partition id-bearing items by manifest membership.

    Returns (train, test, excluded_count). In strict mode every manifest id
    must exist among the items; in lenient mode a non-empty intersection
    suffices.
    """
    by_id = {item.id: item for item in items}
    train_ids = list(manifest.train)
    test_ids = list(manifest.test)
    known = set(by_id)
    unknown = [i for i in train_ids + test_ids if i not in known]
    if strict and unknown:
        raise UnknownIds(
            f"{len(unknown)} manifest ids not in dataset, e.g. "
            f"{unknown[:3]}")
    train = [by_id[i] for i in train_ids if i in known]
    test = [by_id[i] for i in test_ids if i in known]
    if not train or not test:
        raise EmptySplit("manifest selects an empty train or test side")
    listed = set(train_ids) | set(test_ids)
    excluded = sum(1 for i in by_id if i not in listed)
    return train, test, excluded
