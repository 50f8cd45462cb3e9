"""Count-based region embedders over per-cell feature counts.

``CountEmbedder`` returns each cell's raw count vector;
``ContextualCountEmbedder`` augments it with per-ring neighborhood means.
Both follow the scikit-learn fit/transform protocol so they compose with
the wider ecosystem, and any externally trained embedding can be loaded
through the same matrix format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from obsr.hexgrid import CellId, cell_of, ring

CE = "CE"
CCE = "CCE"
EXTERNAL = "external"

MODE_CONCAT = "concat"
MODE_SQUASHED = "squashed"


class EmbedError(Exception):
    pass


class EmptyFilter(EmbedError):
    pass


class NotFitted(EmbedError):
    pass


@dataclass(frozen=True)
class FeatureCountTable:
    """Per-cell counts of map features, columns aligned to a sorted,
    deduplicated vocabulary of "key=value" strings."""

    resolution: int
    vocabulary: tuple
    counts: dict  # CellId -> np.ndarray of shape (len(vocabulary),)

    def __post_init__(self):
        if list(self.vocabulary) != sorted(set(self.vocabulary)):
            raise EmbedError("vocabulary must be sorted and deduplicated")
        width = len(self.vocabulary)
        for cell, vec in self.counts.items():
            if vec.shape != (width,):
                raise EmbedError(
                    f"cell {cell}: count vector of shape {vec.shape}, "
                    f"expected ({width},)")
            if (vec < 0).any():
                raise EmbedError(f"cell {cell}: negative count")

    def vector(self, cell: CellId) -> np.ndarray:
        vec = self.counts.get(cell)
        if vec is None:
            return np.zeros(len(self.vocabulary))
        return vec.astype(np.float64)


def ingest_feature_counts(records, r: int, feature_filter) -> FeatureCountTable:
    """Count filtered features per cell.

    ``records`` yields (GeoPoint, "key=value") pairs; features outside the
    filter are ignored. The table vocabulary is the sorted, deduplicated
    filter.
    """
    vocabulary = tuple(sorted(set(feature_filter)))
    if not vocabulary:
        raise EmptyFilter("feature filter is empty")
    index = {key: i for i, key in enumerate(vocabulary)}
    counts: dict = {}
    for point, key in records:
        col = index.get(key)
        if col is None:
            continue
        cell = cell_of(point, r)
        vec = counts.get(cell)
        if vec is None:
            vec = counts[cell] = np.zeros(len(vocabulary), dtype=np.int64)
        vec[col] += 1
    return FeatureCountTable(resolution=r, vocabulary=vocabulary,
                             counts=counts)


def load_tag_filter(path) -> list[str]:
    """A tag filter file is a JSON list of "key=value" strings."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list) or not all(isinstance(s, str) for s in data):
        raise EmbedError(f"{path}: expected a JSON list of strings")
    return data


@dataclass
class EmbeddingMatrix:
    """cell -> vector lookup plus provenance; the exchange format between
    embedders (including external ones) and the task baselines."""

    dim: int
    vectors: dict  # CellId -> np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": EXTERNAL})

    def __post_init__(self):
        for cell, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise EmbedError(
                    f"cell {cell}: vector shape {vec.shape} != ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise EmbedError(f"cell {cell}: non-finite embedding")

    def vector(self, cell: CellId) -> np.ndarray:
        vec = self.vectors.get(cell)
        if vec is None:
            return np.zeros(self.dim)
        return vec

    def __len__(self):
        return len(self.vectors)

    def to_csv(self, path, sidecar: bool = True):
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            cols = ",".join(f"f_{i}" for i in range(self.dim))
            f.write(f"cell,{cols}\n")
            for cell in sorted(self.vectors):
                values = ",".join(f"{v:.10g}" for v in self.vectors[cell])
                f.write(f"{cell.to_string()},{values}\n")
        if sidecar:
            with open(path.with_suffix(path.suffix + ".json"), "w",
                      encoding="utf-8") as f:
                json.dump(self.provenance, f, indent=2, sort_keys=True)
                f.write("\n")

    @classmethod
    def from_csv(cls, path) -> "EmbeddingMatrix":
        path = Path(path)
        sidecar = path.with_suffix(path.suffix + ".json")
        provenance = {"kind": EXTERNAL}
        if sidecar.is_file():
            with open(sidecar, encoding="utf-8") as f:
                provenance = json.load(f)
        vectors = {}
        with open(path, encoding="utf-8") as f:
            header = f.readline().rstrip("\n").split(",")
            if header[0] != "cell":
                raise EmbedError(f"{path}: first column must be 'cell'")
            dim = len(header) - 1
            for line in f:
                parts = line.rstrip("\n").split(",")
                vectors[CellId.from_string(parts[0])] = \
                    np.array([float(v) for v in parts[1:]])
        return cls(dim=dim, vectors=vectors, provenance=provenance)


class CountEmbedder(BaseEstimator, TransformerMixin):
    """Embeds a region as its raw feature-count vector."""

    def fit(self, table: FeatureCountTable, y=None):
        self.table_ = table
        return self

    def transform(self, cells) -> EmbeddingMatrix:
        if not hasattr(self, "table_"):
            raise NotFitted("call fit(table) first")
        table = self.table_
        vectors = {cell: table.vector(cell) for cell in cells}
        return EmbeddingMatrix(
            dim=len(table.vocabulary),
            vectors=vectors,
            provenance={"kind": CE, "vocabulary_size": len(table.vocabulary)},
        )


class ContextualCountEmbedder(BaseEstimator, TransformerMixin):
    """Count embedder with neighborhood context: per-ring mean count
    vectors out to ring ``k``, either concatenated (dim grows (k+1)-fold)
    or squashed into a distance-discounted sum (dim preserved).

    Cells missing from the table count as zero vectors in ring means.
    """

    def __init__(self, k: int = 2, mode: str = MODE_CONCAT):
        self.k = k
        self.mode = mode

    def fit(self, table: FeatureCountTable, y=None):
        if self.k < 0:
            raise EmbedError(f"k must be >= 0, got {self.k}")
        if self.mode not in (MODE_CONCAT, MODE_SQUASHED):
            raise EmbedError(f"unknown mode {self.mode!r}")
        self.table_ = table
        return self

    def transform(self, cells) -> EmbeddingMatrix:
        if not hasattr(self, "table_"):
            raise NotFitted("call fit(table) first")
        table = self.table_
        width = len(table.vocabulary)
        vectors = {}
        for cell in cells:
            means = [table.vector(cell)]
            for i in range(1, self.k + 1):
                members = ring(cell, i)
                acc = np.zeros(width)
                for member in members:
                    acc += table.vector(member)
                means.append(acc / len(members))
            if self.mode == MODE_CONCAT:
                vectors[cell] = np.concatenate(means)
            else:
                acc = np.zeros(width)
                for i, mean in enumerate(means):
                    acc += mean / (i + 1)
                vectors[cell] = acc
        dim = width * (self.k + 1) if self.mode == MODE_CONCAT else width
        return EmbeddingMatrix(
            dim=dim,
            vectors=vectors,
            provenance={"kind": CCE, "k": self.k, "mode": self.mode,
                        "vocabulary_size": width},
        )


def count_embed(table: FeatureCountTable, cells) -> EmbeddingMatrix:
    return CountEmbedder().fit(table).transform(cells)


def contextual_count_embed(table: FeatureCountTable, cells, k: int = 2,
                           mode: str = MODE_CONCAT) -> EmbeddingMatrix:
    return ContextualCountEmbedder(k=k, mode=mode).fit(table).transform(cells)
