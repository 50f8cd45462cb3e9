"""Evaluation metric suite: regression errors, R², haversine distances,
DTW over cell sequences, sequence accuracy, and horizon (@k) evaluation.

All functions are pure and deterministic; horizon evaluation aggregates
per-pair metrics in input order with a deterministic reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from obsr.hexgrid import CellId, GeoPoint, centroid

# mean Earth radius; the haversine distances below are in meters
EARTH_RADIUS_M = 6_371_008.8

DEFAULT_KS = (1, 3, 5, 7, 10)


class MetricError(Exception):
    pass


class LengthMismatch(MetricError):
    pass


class EmptySequence(MetricError):
    pass


class ZeroVariance(MetricError):
    pass


@dataclass
class MetricReport:
    """A named bundle of metric values for one task evaluation."""

    task: str
    entries: dict[str, float] = field(default_factory=dict)
    k: int | None = None
    n_samples: int = 1
    scale_hint: str | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise MetricError("n_samples must be >= 1")
        bad = {k: v for k, v in self.entries.items() if not math.isfinite(v)}
        if bad:
            raise MetricError(f"non-finite metric values: {bad}")

    def to_dict(self) -> dict:
        out = {"task": self.task, "entries": dict(self.entries),
               "n_samples": self.n_samples}
        if self.k is not None:
            out["k"] = self.k
        if self.scale_hint is not None:
            out["scale_hint"] = self.scale_hint
        return out


def regression_metrics(y, yhat, task: str = "regression") -> MetricReport:
    """MSE, RMSE, MAE, MAPE and sMAPE between targets and predictions.

    MAPE excludes zero targets (count reported under ``mape_excluded``); if
    every target is zero, MAPE is absent from the report rather than NaN.
    sMAPE defines 0/0 terms as 0 and stays within [0, 200].
    """
    y = [float(v) for v in y]
    yhat = [float(v) for v in yhat]
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} targets vs {len(yhat)} predictions")
    if not y:
        raise EmptySequence("no samples")
    for v in y + yhat:
        if not math.isfinite(v):
            raise MetricError("non-finite input")

    n = len(y)
    errs = [p - t for t, p in zip(y, yhat)]
    mse = sum(e * e for e in errs) / n
    mae = sum(abs(e) for e in errs) / n

    smape_terms = []
    for t, p in zip(y, yhat):
        denom = (abs(t) + abs(p)) / 2.0
        smape_terms.append(0.0 if denom == 0.0 else abs(p - t) / denom)
    smape = 100.0 * sum(smape_terms) / n

    entries = {
        "mse": mse,
        "rmse": math.sqrt(mse),
        "mae": mae,
        "smape": smape,
    }

    nonzero = [(t, p) for t, p in zip(y, yhat) if t != 0.0]
    excluded = n - len(nonzero)
    if nonzero:
        entries["mape"] = 100.0 * sum(
            abs(p - t) / abs(t) for t, p in nonzero) / len(nonzero)
    if excluded:
        entries["mape_excluded"] = float(excluded)

    return MetricReport(task=task, entries=entries, n_samples=n)


def r2(y, yhat) -> float:
    """Coefficient of determination about the mean of ``y``; may be negative."""
    y = [float(v) for v in y]
    yhat = [float(v) for v in yhat]
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} targets vs {len(yhat)} predictions")
    if len(y) < 2:
        raise MetricError("R^2 needs at least 2 samples")
    mean = sum(y) / len(y)
    ss_tot = sum((t - mean) ** 2 for t in y)
    if ss_tot == 0.0:
        raise ZeroVariance("targets have zero variance")
    ss_res = sum((t - p) ** 2 for t, p in zip(y, yhat))
    return 1.0 - ss_res / ss_tot


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    s = math.sin(dlat / 2.0) ** 2 + \
        math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(s), math.sqrt(1.0 - s))


def _centroid_distance(a: CellId, b: CellId) -> float:
    return haversine(centroid(a), centroid(b))


def avg_haversine(pred, gold, k: int) -> float:
    """Mean great-circle distance between positionally corresponding cell
    centroids over the first ``min(k, |pred|, |gold|)`` steps."""
    if not pred or not gold:
        raise EmptySequence("empty cell sequence")
    n = min(k, len(pred), len(gold))
    if n < 1:
        raise EmptySequence(f"horizon k={k} selects no positions")
    return sum(_centroid_distance(p, g)
               for p, g in zip(pred[:n], gold[:n])) / n


def dtw_haversine(pred, gold, k: int) -> float:
    """Dynamic-time-warping alignment cost in meters between the first
    ``min(k, len)`` cells of each sequence.

    Classic full-window recurrence with no step weights and no path
    normalization; cell cost is the haversine distance between centroids.
    """
    if not pred or not gold:
        raise EmptySequence("empty cell sequence")
    p = pred[:min(k, len(pred))]
    g = gold[:min(k, len(gold))]
    if not p or not g:
        raise EmptySequence(f"horizon k={k} selects no positions")

    n, m = len(p), len(g)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    # row 0 of the cost matrix is seeded through the virtual prev row
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        for j in range(1, m + 1):
            d = _centroid_distance(p[i - 1], g[j - 1])
            best = min(prev[j], cur[j - 1], prev[j - 1])
            cur[j] = d + best
        prev = cur
    return prev[m]


def sequence_accuracy(pred, gold, k: int) -> float:
    """Percentage of exact positional matches over the first
    ``min(k, |pred|, |gold|)`` steps."""
    if not pred or not gold:
        raise EmptySequence("empty cell sequence")
    n = min(k, len(pred), len(gold))
    if n < 1:
        raise EmptySequence(f"horizon k={k} selects no positions")
    hits = sum(1 for p, g in zip(pred[:n], gold[:n]) if p == g)
    return 100.0 * hits / n


def evaluate_at_k(pairs, ks=DEFAULT_KS, task: str = "trajectory"
                  ) -> list[MetricReport]:
    """Per-horizon evaluation of (predicted, gold) cell-sequence pairs.

    Per k, reports the mean over pairs of average haversine distance, DTW
    distance, and sequence accuracy.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptySequence("no prediction pairs")
    for k in ks:
        if k < 1:
            raise MetricError(f"horizon k={k} must be positive")
    reports = []
    for k in ks:
        h_sum = dtw_sum = acc_sum = 0.0
        for pred, gold in pairs:
            h_sum += avg_haversine(pred, gold, k)
            dtw_sum += dtw_haversine(pred, gold, k)
            acc_sum += sequence_accuracy(pred, gold, k)
        n = len(pairs)
        reports.append(MetricReport(
            task=task,
            entries={
                "avg_haversine": h_sum / n,
                "dtw": dtw_sum / n,
                "seq_accuracy": acc_sum / n,
            },
            k=k,
            n_samples=n,
        ))
    return reports
