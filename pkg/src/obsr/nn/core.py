"""Dense layers, activations, dropout, and a sequential container.

Hand-written forward/backward passes over float64 numpy arrays. Every
backward pass is verified against central finite differences in the test
suite; no autodiff framework is involved.
"""

from __future__ import annotations

import numpy as np


class ShapeMismatch(Exception):
    pass


class Parameter:
    """A named tensor with an aligned gradient buffer."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def parameters(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Dense(Layer):
    """y = x W + b"""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 name: str = "dense"):
        self.W = Parameter(f"{name}.W",
                           glorot_uniform(rng, in_dim, out_dim,
                                          (in_dim, out_dim)))
        self.b = Parameter(f"{name}.b", np.zeros(out_dim))
        self._x = None

    def parameters(self):
        return [self.W, self.b]

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.W.value.shape[0]:
            raise ShapeMismatch(
                f"expected (n, {self.W.value.shape[0]}), got {x.shape}")
        self._x = x
        return x @ self.W.value + self.b.value

    def backward(self, dy):
        dy = np.asarray(dy, dtype=np.float64)
        if self._x is None:
            raise RuntimeError("backward before forward")
        self.W.grad += self._x.T @ dy
        self.b.grad += dy.sum(axis=0)
        return dy @ self.W.value.T


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Sigmoid(Layer):
    def __init__(self):
        self._y = None

    def forward(self, x, training=False):
        self._y = sigmoid(np.asarray(x, dtype=np.float64))
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class Dropout(Layer):
    """Inverted dropout: identity at inference, unbiased at training."""

    def __init__(self, p: float, rng: np.random.Generator):
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout p must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng
        self._mask = None

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if not training or self.p == 0.0:
            self._mask = None
            return x
        keep = self.rng.random(x.shape) >= self.p
        self._mask = keep / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


class Sequential(Layer):
    def __init__(self, layers):
        self.layers = list(layers)

    def parameters(self):
        out = []
        for layer in self.layers:
            out.extend(layer.parameters())
        return out

    def forward(self, x, training=False):
        for layer in self.layers:
            x = layer.forward(x, training=training)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy


def mlp(in_dim: int, hidden, out_dim: int, rng: np.random.Generator,
        activation: str = "relu", dropout_p: float = 0.0,
        dropout_after: int | None = None,
        output_activation: str | None = None) -> Sequential:
    """Feedforward stack used by the region baselines.

    ``dropout_after`` counts hidden layers (1-based); dropout is inserted
    after that hidden layer's activation.
    """
    acts = {"relu": ReLU, "sigmoid": Sigmoid}
    layers = []
    prev = in_dim
    for idx, width in enumerate(hidden, start=1):
        layers.append(Dense(prev, width, rng, name=f"h{idx}"))
        layers.append(acts[activation]())
        if dropout_p > 0.0 and dropout_after == idx:
            layers.append(Dropout(dropout_p, rng))
        prev = width
    layers.append(Dense(prev, out_dim, rng, name="out"))
    if output_activation is not None:
        layers.append(acts[output_activation]())
    return Sequential(layers)
