"""Task baselines wired from the neural kernel: feedforward regressors for
the region tasks, an LSTM duration regressor for travel time, and an
LSTM + attention next-region classifier with teacher forcing and a hybrid
geographic loss.

These models are deliberately simple reference points for comparing
embeddings, not performance ceilings. All of them follow the scikit-learn
estimator protocol (fit/predict/get_params).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from obsr.embedders import EmbeddingMatrix
from obsr.hexgrid import DirectionLabel, centroid, neighbor_in_direction
from obsr.metrics import (
    MetricReport,
    evaluate_at_k,
    haversine,
    r2,
    regression_metrics,
)
from obsr.nn import (
    Adam,
    Dense,
    MultiheadSelfAttention,
    StackedLSTM,
    cross_entropy,
    expected_log_distance,
    l1,
    mlp,
    smooth_l1,
)
from obsr.nn.config import LOSS_L1, LOSS_SMOOTH_L1, TrainConfig
from obsr.regionize import INTENSITY, MEAN_VALUE, RegionDataset
from obsr.splitting import SegmentedTrajectory, SplitManifest

logger = logging.getLogger(__name__)

TASK_TTE = "tte"
TASK_HMP = "hmp"

DEFAULT_KS = (1, 3, 5, 7, 10)


class BaselineError(Exception):
    pass


class EmptyTrainSet(BaselineError):
    pass


class DimensionMismatch(BaselineError):
    pass


class TargetOutOfRange(BaselineError):
    pass


class NonPositiveDuration(BaselineError):
    pass


class Standardizer:
    """Per-feature mean/std fitted on the training side only.

    Remembers which cells it saw at fit time so tests can assert the
    absence of test-side leakage.
    """

    def __init__(self):
        self.mean_ = None
        self.std_ = None
        self.fit_cell_ids_ = frozenset()

    def fit(self, X: np.ndarray, cell_ids=()):
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        self.std_ = std
        self.fit_cell_ids_ = frozenset(cell_ids)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean_ is None:
            raise BaselineError("standardizer not fitted")
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.std_


@dataclass
class RegionTaskInstance:
    """Embeddings + region targets + split manifest for one region task."""

    embeddings: EmbeddingMatrix
    targets: RegionDataset
    manifest: SplitManifest

    def arrays(self):
        """Train/test matrices with train-only standardization.

        Returns (X_train, y_train, X_test, y_test, standardizer,
        missing_embedding_count). Cells without an embedding fall back to
        zero vectors and are counted.
        """
        from obsr.hexgrid import CellId

        missing = 0
        by_side = {}
        for side, ids in (("train", self.manifest.train),
                          ("test", self.manifest.test)):
            X, y, cells = [], [], []
            for cid in ids:
                cell = CellId.from_string(cid)
                row = self.targets.rows.get(cell)
                if row is None:
                    raise BaselineError(
                        f"manifest cell {cid} missing from targets")
                if cell not in self.embeddings.vectors:
                    missing += 1
                X.append(self.embeddings.vector(cell))
                y.append(row.target)
                cells.append(cid)
            by_side[side] = (np.array(X), np.array(y), cells)
        if missing:
            logger.warning("%d manifest cells lack embeddings; zero-vector "
                           "fallback used", missing)
        X_train, y_train, train_cells = by_side["train"]
        X_test, y_test, _ = by_side["test"]
        if len(X_train) == 0:
            raise EmptyTrainSet("manifest has no train cells")
        standardizer = Standardizer().fit(X_train, train_cells)
        return (standardizer.transform(X_train), y_train,
                standardizer.transform(X_test), y_test, standardizer,
                missing)


class RegionRegressor(BaseEstimator, RegressorMixin):
    """Feedforward regressor: hidden stack (50, 100, 50), configurable
    activations, dropout after the second hidden layer, smooth-L1 loss.

    Targets are internally z-scored on the training set (stored and
    inverted at prediction) so the fixed learning rate works across target
    scales; reported metrics are always on raw targets.
    """

    def __init__(self, hidden=(50, 100, 50), activation="relu",
                 output_activation=None, dropout_p=0.2, dropout_after=2,
                 loss=LOSS_SMOOTH_L1, lr=0.001, epochs=50, batch_size=32,
                 standardize_targets=True, seed=0):
        self.hidden = hidden
        self.activation = activation
        self.output_activation = output_activation
        self.dropout_p = dropout_p
        self.dropout_after = dropout_after
        self.loss = loss
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.standardize_targets = standardize_targets
        self.seed = seed

    def _loss_fn(self):
        return {LOSS_SMOOTH_L1: smooth_l1, LOSS_L1: l1}[self.loss]

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
        if len(X) != len(y):
            raise DimensionMismatch(f"{len(X)} rows vs {len(y)} targets")
        if len(X) == 0:
            raise EmptyTrainSet("no training rows")
        rng = np.random.default_rng(self.seed)
        self.model_ = mlp(X.shape[1], tuple(self.hidden), 1, rng,
                          activation=self.activation,
                          dropout_p=self.dropout_p,
                          dropout_after=self.dropout_after,
                          output_activation=self.output_activation)
        if self.standardize_targets and self.output_activation is None:
            self.y_mean_ = float(y.mean())
            self.y_std_ = float(y.std()) or 1.0
        else:
            self.y_mean_, self.y_std_ = 0.0, 1.0
        y_scaled = (y - self.y_mean_) / self.y_std_

        opt = Adam(self.model_.parameters(), lr=self.lr)
        loss_fn = self._loss_fn()
        n = len(X)
        self.losses_ = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                out = self.model_.forward(X[idx], training=True)
                value, grad = loss_fn(out, y_scaled[idx])
                self.model_.backward(grad)
                opt.step()
                epoch_loss += value * len(idx)
            self.losses_.append(epoch_loss / n)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = self.model_.forward(X, training=False)
        return out.reshape(-1) * self.y_std_ + self.y_mean_


class IntensityRegressor(RegionRegressor):
    """Same trunk with sigmoid activations and a sigmoid output head, so
    predictions always land in (0, 1); trained with L1 loss."""

    def __init__(self, hidden=(50, 100, 50), dropout_p=0.2, dropout_after=2,
                 lr=0.001, epochs=50, batch_size=32, seed=0):
        super().__init__(hidden=hidden, activation="sigmoid",
                         output_activation="sigmoid", dropout_p=dropout_p,
                         dropout_after=dropout_after, loss=LOSS_L1, lr=lr,
                         epochs=epochs, batch_size=batch_size,
                         standardize_targets=False, seed=seed)


def train_region_regressor(inst: RegionTaskInstance,
                           cfg: TrainConfig | None = None):
    """Fit the mean-value baseline and evaluate on the manifest's test side.

    Returns (model, MetricReport) with the five regression metrics.
    """
    cfg = cfg or TrainConfig()
    if inst.targets.target_kind != MEAN_VALUE:
        raise BaselineError(
            f"expected mean_value targets, got {inst.targets.target_kind}")
    X_train, y_train, X_test, y_test, standardizer, _ = inst.arrays()
    model = RegionRegressor(dropout_p=cfg.dropout_p, lr=cfg.lr,
                            epochs=cfg.epochs, batch_size=cfg.batch_size,
                            loss=cfg.loss, seed=cfg.seed)
    model.fit(X_train, y_train)
    model.standardizer_ = standardizer
    pred = model.predict(X_test)
    report = regression_metrics(y_test, pred, task="region_mean_value")
    report.n_samples = len(y_test)
    return model, report


def train_intensity_model(inst: RegionTaskInstance,
                          cfg: TrainConfig | None = None):
    """Fit the intensity baseline; reports MSE/RMSE/MAE/R² (percentage
    errors are excluded for [0, 1] targets)."""
    cfg = cfg or TrainConfig(loss=LOSS_L1)
    if inst.targets.target_kind != INTENSITY:
        raise BaselineError(
            f"expected intensity targets, got {inst.targets.target_kind}")
    X_train, y_train, X_test, y_test, standardizer, _ = inst.arrays()
    if ((y_train < 0) | (y_train > 1)).any():
        raise TargetOutOfRange("intensity targets must lie in [0, 1]")
    model = IntensityRegressor(dropout_p=cfg.dropout_p, lr=cfg.lr,
                               epochs=cfg.epochs, batch_size=cfg.batch_size,
                               seed=cfg.seed)
    model.fit(X_train, y_train)
    model.standardizer_ = standardizer
    pred = model.predict(X_test)
    base = regression_metrics(y_test, pred, task="region_intensity")
    entries = {k: base.entries[k] for k in ("mse", "rmse", "mae")}
    entries["r2"] = r2(y_test, pred)
    return model, MetricReport(task="region_intensity", entries=entries,
                               n_samples=len(y_test))


@dataclass
class SequenceTaskInstance:
    """Segmented trajectories + cell embeddings + manifest for a sequence
    task (travel-time regression or next-region prediction)."""

    trajectories: list
    embeddings: EmbeddingMatrix
    manifest: SplitManifest
    task: str = TASK_TTE

    def split(self):
        by_id = {t.id: t for t in self.trajectories}
        train = [by_id[i] for i in self.manifest.train if i in by_id]
        test = [by_id[i] for i in self.manifest.test if i in by_id]
        if not train:
            raise EmptyTrainSet("manifest selects no training trajectories")
        if not test:
            raise EmptyTrainSet("manifest selects no test trajectories")
        return train, test

    def sequence(self, seg: SegmentedTrajectory) -> np.ndarray:
        return np.stack([self.embeddings.vector(c) for c in seg.X.cells])


def _length_buckets(indices, lengths, batch_size, rng):
    """Group same-length sequences into batches of at most batch_size."""
    by_len: dict = {}
    for i in indices:
        by_len.setdefault(lengths[i], []).append(i)
    batches = []
    for length in sorted(by_len):
        members = by_len[length]
        for start in range(0, len(members), batch_size):
            batches.append(members[start:start + batch_size])
    order = rng.permutation(len(batches))
    return [batches[i] for i in order]


class TravelTimeEstimator(BaseEstimator, RegressorMixin):
    """Two stacked LSTM layers over the embedding sequence; the final
    hidden state feeds a dense head whose output passes through ReLU, so
    predicted durations are never negative.

    Durations are scaled by their training mean so the fixed learning rate
    converges on raw-seconds targets; predictions are rescaled back.
    """

    def __init__(self, hidden=128, layers=2, lr=0.001, epochs=50,
                 batch_size=32, seed=0):
        self.hidden = hidden
        self.layers = layers
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, sequences, durations):
        durations = np.asarray(durations, dtype=np.float64)
        if len(sequences) != len(durations):
            raise DimensionMismatch(
                f"{len(sequences)} sequences vs {len(durations)} durations")
        if len(sequences) == 0:
            raise EmptyTrainSet("no training sequences")
        if (durations <= 0).any():
            raise NonPositiveDuration("durations must be positive seconds")
        sequences = [np.asarray(s, dtype=np.float64) for s in sequences]
        dim = sequences[0].shape[1]
        rng = np.random.default_rng(self.seed)
        self.lstm_ = StackedLSTM(dim, self.hidden, self.layers, rng)
        self.head_ = Dense(self.hidden, 1, rng, name="duration")
        self.scale_ = float(durations.mean())
        y = durations / self.scale_

        params = self.lstm_.parameters() + self.head_.parameters()
        opt = Adam(params, lr=self.lr)
        lengths = [len(s) for s in sequences]
        n = len(sequences)
        self.losses_ = []
        for _ in range(self.epochs):
            epoch_loss = 0.0
            for idx in _length_buckets(rng.permutation(n), lengths,
                                       self.batch_size, rng):
                xs = np.stack([sequences[i] for i in idx], axis=1)
                hs = self.lstm_.forward(xs)
                h_final = hs[-1]
                raw = self.head_.forward(h_final)
                out = np.maximum(raw, 0.0)
                target = y[idx].reshape(-1, 1)
                value, grad = l1(out, target)
                grad = np.where(raw > 0, grad, 0.0)
                dh = self.head_.backward(grad)
                dhs = np.zeros_like(hs)
                dhs[-1] = dh
                self.lstm_.backward(dhs)
                opt.step()
                epoch_loss += value * len(idx)
            self.losses_.append(epoch_loss / n)
        return self

    def predict(self, sequences):
        out = np.empty(len(sequences))
        for i, seq in enumerate(sequences):
            xs = np.asarray(seq, dtype=np.float64)[:, None, :]
            hs = self.lstm_.forward(xs)
            raw = self.head_.forward(hs[-1])
            out[i] = max(raw[0, 0], 0.0) * self.scale_
        return out


def train_tte(inst: SequenceTaskInstance, cfg: TrainConfig | None = None):
    """Fit the travel-time baseline; report MSE/RMSE/MAE/MAPE on raw
    seconds over the manifest's test side."""
    cfg = cfg or TrainConfig(loss=LOSS_L1)
    if inst.task != TASK_TTE:
        raise BaselineError(f"expected a tte instance, got {inst.task!r}")
    train, test = inst.split()
    model = TravelTimeEstimator(lr=cfg.lr, epochs=cfg.epochs,
                                batch_size=cfg.batch_size, seed=cfg.seed)
    model.fit([inst.sequence(t) for t in train],
              [t.X.duration_s for t in train])
    pred = model.predict([inst.sequence(t) for t in test])
    gold = [t.X.duration_s for t in test]
    base = regression_metrics(gold, pred, task="travel_time")
    entries = {k: v for k, v in base.entries.items()
               if k in ("mse", "rmse", "mae", "mape")}
    return model, MetricReport(task="travel_time", entries=entries,
                               n_samples=len(gold))


class MobilityPredictor(BaseEstimator):
    """Next-region classifier: stacked LSTM over cell embeddings, causal
    multihead self-attention over the unrolled states, and a six-way
    direction classifier at every step.

    Training teacher-forces gold cells; the loss mixes cross-entropy with
    the expected log-haversine distance of the candidate neighbor cells
    (weight ``geo_weight``). Inference feeds predicted cells back in,
    decoding direction labels into grid neighbors, so rollouts are always
    contiguous paths.
    """

    N_DIRECTIONS = 6

    def __init__(self, hidden=128, layers=2, heads=4, geo_weight=0.7,
                 lr=0.001, epochs=10, batch_size=32, seed=0):
        self.hidden = hidden
        self.layers = layers
        self.heads = heads
        self.geo_weight = geo_weight
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, cell_sequences, embeddings: EmbeddingMatrix):
        """Teacher-forced training on full cell sequences (input prefix
        plus gold continuation)."""
        from obsr.hexgrid import direction_between

        cell_sequences = [list(s) for s in cell_sequences if len(s) >= 2]
        if not cell_sequences:
            raise EmptyTrainSet("no usable training sequences")
        self.embeddings_ = embeddings
        dim = embeddings.dim
        rng = np.random.default_rng(self.seed)
        self.lstm_ = StackedLSTM(dim, self.hidden, self.layers, rng)
        self.attn_ = MultiheadSelfAttention(self.hidden, self.heads, rng,
                                            causal=True)
        self.head_ = Dense(self.hidden, self.N_DIRECTIONS, rng,
                           name="direction")

        # precompute per sequence: inputs, gold labels, candidate log-dists
        prepared = []
        for cells in cell_sequences:
            xs = np.stack([embeddings.vector(c) for c in cells[:-1]])
            labels = np.array([int(direction_between(a, b))
                               for a, b in zip(cells, cells[1:])])
            logd = np.empty((len(cells) - 1, self.N_DIRECTIONS))
            for t, (cur, gold) in enumerate(zip(cells, cells[1:])):
                gold_center = centroid(gold)
                for d in range(self.N_DIRECTIONS):
                    cand = neighbor_in_direction(cur, DirectionLabel(d))
                    logd[t, d] = math.log1p(
                        haversine(centroid(cand), gold_center))
            prepared.append((xs, labels, logd))

        params = (self.lstm_.parameters() + self.attn_.parameters()
                  + self.head_.parameters())
        opt = Adam(params, lr=self.lr)
        lengths = [p[0].shape[0] for p in prepared]
        n = len(prepared)
        w = self.geo_weight
        self.losses_ = []
        for _ in range(self.epochs):
            epoch_loss = 0.0
            epoch_steps = 0
            for idx in _length_buckets(rng.permutation(n), lengths,
                                       self.batch_size, rng):
                xs = np.stack([prepared[i][0] for i in idx], axis=1)
                labels = np.stack([prepared[i][1] for i in idx], axis=1)
                logd = np.stack([prepared[i][2] for i in idx], axis=1)
                T, B, _ = xs.shape
                hs = self.lstm_.forward(xs)
                ctx = self.attn_.forward(hs)
                logits = self.head_.forward(ctx.reshape(T * B, self.hidden))
                flat_labels = labels.reshape(T * B)
                flat_logd = logd.reshape(T * B, self.N_DIRECTIONS)
                ce, dce = cross_entropy(logits, flat_labels)
                geo, dgeo = expected_log_distance(logits, flat_logd)
                value = (1.0 - w) * ce + w * geo
                dlogits = (1.0 - w) * dce + w * dgeo
                dctx = self.head_.backward(dlogits).reshape(T, B, self.hidden)
                dhs = self.attn_.backward(dctx)
                self.lstm_.backward(dhs)
                opt.step()
                epoch_loss += value * T * B
                epoch_steps += T * B
            self.losses_.append(epoch_loss / epoch_steps)
        self.rollout_zero_embeddings_ = 0
        return self

    def _logits_for(self, cells) -> np.ndarray:
        xs = np.stack([self.embeddings_.vector(c) for c in cells])[:, None, :]
        hs = self.lstm_.forward(xs)
        ctx = self.attn_.forward(hs)
        logits = self.head_.forward(ctx[:, 0, :])
        return logits[-1]

    def predict(self, prefix_cells, n_steps: int):
        """Roll out ``n_steps`` predicted cells after the prefix, feeding
        each predicted cell back as the next input."""
        cells = list(prefix_cells)
        out = []
        for _ in range(n_steps):
            label = int(np.argmax(self._logits_for(cells)))
            nxt = neighbor_in_direction(cells[-1], DirectionLabel(label))
            if nxt not in self.embeddings_.vectors:
                self.rollout_zero_embeddings_ += 1
            cells.append(nxt)
            out.append(nxt)
        return out


def train_hmp(inst: SequenceTaskInstance, cfg: TrainConfig | None = None,
              ks=DEFAULT_KS):
    """Fit the next-region baseline with teacher forcing and evaluate
    rollouts against gold continuations at each horizon in ``ks``."""
    cfg = cfg or TrainConfig(epochs=10, loss="hybrid_hmp")
    if inst.task != TASK_HMP:
        raise BaselineError(f"expected an hmp instance, got {inst.task!r}")
    train, test = inst.split()
    model = MobilityPredictor(geo_weight=cfg.geo_weight, lr=cfg.lr,
                              epochs=cfg.epochs, batch_size=cfg.batch_size,
                              seed=cfg.seed)
    model.fit([list(t.X.cells) + list(t.Y) for t in train], inst.embeddings)
    pairs = []
    for t in test:
        pred = model.predict(t.X.cells, len(t.Y))
        pairs.append((pred, list(t.Y)))
    reports = evaluate_at_k(pairs, ks=ks, task="mobility")
    return model, reports
