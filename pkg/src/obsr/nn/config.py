"""Training hyperparameters shared by the task baselines."""

from __future__ import annotations

from dataclasses import dataclass

LOSS_SMOOTH_L1 = "smooth_l1"
LOSS_L1 = "l1"
LOSS_CROSS_ENTROPY = "cross_entropy"
LOSS_HYBRID_HMP = "hybrid_hmp"
_LOSSES = (LOSS_SMOOTH_L1, LOSS_L1, LOSS_CROSS_ENTROPY, LOSS_HYBRID_HMP)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0
    loss: str = LOSS_SMOOTH_L1
    geo_weight: float = 0.7
    dropout_p: float = 0.2

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.geo_weight <= 1.0:
            raise ValueError(
                f"geo_weight must be in [0, 1], got {self.geo_weight}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(
                f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.loss not in _LOSSES:
            raise ValueError(f"loss {self.loss!r} not in {_LOSSES}")

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "loss": self.loss,
            "geo_weight": self.geo_weight,
            "dropout_p": self.dropout_p,
        }
