"""Multihead scaled dot-product self-attention with optional causal mask."""

from __future__ import annotations

import numpy as np

from obsr.nn.core import Parameter, ShapeMismatch, glorot_uniform


def _softmax_last(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class MultiheadSelfAttention:
    """softmax(QK^T / sqrt(d_head)) V per head, heads concatenated and
    projected. Input and output are (T, B, d_model)."""

    def __init__(self, d_model: int, n_heads: int, rng: np.random.Generator,
                 causal: bool = False, name: str = "attn"):
        if d_model % n_heads != 0:
            raise ShapeMismatch(
                f"model dim {d_model} not divisible by {n_heads} heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.causal = causal
        def w(tag):
            return Parameter(f"{name}.{tag}",
                             glorot_uniform(rng, d_model, d_model,
                                            (d_model, d_model)))
        self.Wq, self.Wk, self.Wv, self.Wo = w("Wq"), w("Wk"), w("Wv"), w("Wo")
        self.bo = Parameter(f"{name}.bo", np.zeros(d_model))
        self._cache = None

    def parameters(self):
        return [self.Wq, self.Wk, self.Wv, self.Wo, self.bo]

    def _split(self, x: np.ndarray) -> np.ndarray:
        # (T, B, D) -> (B, heads, T, d_head)
        T, B, _ = x.shape
        return x.reshape(T, B, self.n_heads, self.d_head).transpose(1, 2, 0, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        # (B, heads, T, d_head) -> (T, B, D)
        B, _, T, _ = x.shape
        return x.transpose(2, 0, 1, 3).reshape(T, B, self.d_model)

    def forward(self, xs: np.ndarray, training: bool = False) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 3 or xs.shape[2] != self.d_model:
            raise ShapeMismatch(
                f"expected (T, B, {self.d_model}), got {xs.shape}")
        T, B, D = xs.shape
        flat = xs.reshape(T * B, D)
        q = self._split((flat @ self.Wq.value).reshape(T, B, D))
        k = self._split((flat @ self.Wk.value).reshape(T, B, D))
        v = self._split((flat @ self.Wv.value).reshape(T, B, D))

        scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(self.d_head)
        if self.causal:
            mask = np.triu(np.ones((T, T), dtype=bool), k=1)
            scores = np.where(mask, -np.inf, scores)
        attn = _softmax_last(scores)
        ctx = attn @ v             # (B, heads, T, d_head)
        merged = self._merge(ctx)  # (T, B, D)
        out = (merged.reshape(T * B, D) @ self.Wo.value).reshape(T, B, D) \
            + self.bo.value
        self._cache = (xs, q, k, v, attn, merged)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xs, q, k, v, attn, merged = self._cache
        T, B, D = xs.shape
        dy = np.asarray(dy, dtype=np.float64)

        self.bo.grad += dy.sum(axis=(0, 1))
        dy_flat = dy.reshape(T * B, D)
        self.Wo.grad += merged.reshape(T * B, D).T @ dy_flat
        dmerged = (dy_flat @ self.Wo.value.T).reshape(T, B, D)
        dctx = self._split(dmerged)

        dattn = dctx @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx
        # softmax backward per row
        dscores = (dattn - (dattn * attn).sum(axis=-1, keepdims=True)) * attn
        dscores /= np.sqrt(self.d_head)
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q

        dq_flat = self._merge(dq).reshape(T * B, D)
        dk_flat = self._merge(dk).reshape(T * B, D)
        dv_flat = self._merge(dv).reshape(T * B, D)
        flat = xs.reshape(T * B, D)
        self.Wq.grad += flat.T @ dq_flat
        self.Wk.grad += flat.T @ dk_flat
        self.Wv.grad += flat.T @ dv_flat
        dx = dq_flat @ self.Wq.value.T + dk_flat @ self.Wk.value.T \
            + dv_flat @ self.Wv.value.T
        return dx.reshape(T, B, D)
