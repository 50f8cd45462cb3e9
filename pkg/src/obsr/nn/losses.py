"""Loss functions returning (mean loss, gradient w.r.t. the prediction)."""

from __future__ import annotations

import numpy as np


class ClassOutOfRange(Exception):
    pass


def _check_shapes(pred, target):
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")


def smooth_l1(pred: np.ndarray, target: np.ndarray):
    """Per element: 0.5 e^2 when |e| < 1, else |e| - 0.5; mean-reduced."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    e = pred - target
    abs_e = np.abs(e)
    quad = abs_e < 1.0
    loss = np.where(quad, 0.5 * e * e, abs_e - 0.5).mean()
    grad = np.where(quad, e, np.sign(e)) / e.size
    return loss, grad


def l1(pred: np.ndarray, target: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    e = pred - target
    return np.abs(e).mean(), np.sign(e) / e.size


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def cross_entropy(logits: np.ndarray, classes: np.ndarray):
    """Mean negative log-likelihood of integer classes under softmax(logits).

    ``logits``: (n, n_classes); ``classes``: (n,) ints.
    """
    logits = np.asarray(logits, dtype=np.float64)
    classes = np.asarray(classes)
    if logits.ndim != 2 or classes.shape != (logits.shape[0],):
        raise ValueError(
            f"expected (n, c) logits and (n,) classes, got "
            f"{logits.shape} and {classes.shape}")
    if classes.size and (classes.min() < 0 or classes.max() >= logits.shape[1]):
        raise ClassOutOfRange(
            f"class ids must be in [0, {logits.shape[1]}), got "
            f"[{classes.min()}, {classes.max()}]")
    n = logits.shape[0]
    logp = log_softmax(logits)
    loss = -logp[np.arange(n), classes].mean()
    grad = softmax(logits)
    grad[np.arange(n), classes] -= 1.0
    return loss, grad / n


def expected_log_distance(logits: np.ndarray, log_dists: np.ndarray):
    """Expectation under softmax(logits) of per-class log distances.

    Used as the geographic half of the hybrid next-region loss:
    ``log_dists[i, c]`` holds ln(1 + meters from candidate cell c to the
    gold cell) for sample i. Differentiable in the logits.
    """
    logits = np.asarray(logits, dtype=np.float64)
    log_dists = np.asarray(log_dists, dtype=np.float64)
    _check_shapes(logits, log_dists)
    p = softmax(logits)
    per_sample = (p * log_dists).sum(axis=-1)
    loss = per_sample.mean()
    grad = p * (log_dists - per_sample[..., None]) / logits.shape[0]
    return loss, grad
