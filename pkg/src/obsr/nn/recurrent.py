"""Stacked LSTM with full backpropagation through time.

Sequences are laid out (T, batch, dim). Gate order inside the packed
weight matrices is input, forget, cell candidate, output.
"""

from __future__ import annotations

import numpy as np

from obsr.nn.core import Parameter, ShapeMismatch, glorot_uniform, sigmoid


class LSTMLayer:
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator,
                 name: str = "lstm"):
        self.in_dim = in_dim
        self.hidden = hidden
        self.Wx = Parameter(f"{name}.Wx",
                            glorot_uniform(rng, in_dim, hidden,
                                           (in_dim, 4 * hidden)))
        self.Wh = Parameter(f"{name}.Wh",
                            glorot_uniform(rng, hidden, hidden,
                                           (hidden, 4 * hidden)))
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = 1.0  # forget-gate bias
        self.b = Parameter(f"{name}.b", b)
        self._cache = None

    def parameters(self):
        return [self.Wx, self.Wh, self.b]

    def step(self, x_t: np.ndarray, h: np.ndarray, c: np.ndarray):
        """One timestep; returns (h', c', cache)."""
        H = self.hidden
        z = x_t @ self.Wx.value + h @ self.Wh.value + self.b.value
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        cache = (x_t, h, c, i, f, g, o, tanh_c)
        return h_new, c_new, cache

    def forward(self, xs: np.ndarray, training: bool = False) -> np.ndarray:
        """Full sequence; xs is (T, B, in_dim), returns hidden states
        (T, B, hidden)."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 3 or xs.shape[2] != self.in_dim:
            raise ShapeMismatch(
                f"expected (T, B, {self.in_dim}), got {xs.shape}")
        T, B, _ = xs.shape
        h = np.zeros((B, self.hidden))
        c = np.zeros((B, self.hidden))
        hs = np.empty((T, B, self.hidden))
        caches = []
        for t in range(T):
            h, c, cache = self.step(xs[t], h, c)
            hs[t] = h
            caches.append(cache)
        self._cache = caches
        return hs

    def backward(self, dhs: np.ndarray) -> np.ndarray:
        """BPTT given gradients w.r.t. every hidden state (T, B, hidden);
        returns gradients w.r.t. the inputs (T, B, in_dim)."""
        caches = self._cache
        if caches is None:
            raise RuntimeError("backward before forward")
        T = len(caches)
        B = dhs.shape[1]
        H = self.hidden
        dxs = np.empty((T, B, self.in_dim))
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            x_t, h_prev, c_prev, i, f, g, o, tanh_c = caches[t]
            dh = dhs[t] + dh_next
            do = dh * tanh_c
            dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dc_next = dc * f
            dz = np.concatenate([
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ], axis=1)
            self.Wx.grad += x_t.T @ dz
            self.Wh.grad += h_prev.T @ dz
            self.b.grad += dz.sum(axis=0)
            dxs[t] = dz @ self.Wx.value.T
            dh_next = dz @ self.Wh.value.T
        return dxs


class StackedLSTM:
    """Two (or more) LSTM layers, each feeding the next."""

    def __init__(self, in_dim: int, hidden: int, layers: int,
                 rng: np.random.Generator, name: str = "lstm"):
        self.layers = []
        prev = in_dim
        for idx in range(layers):
            self.layers.append(
                LSTMLayer(prev, hidden, rng, name=f"{name}{idx}"))
            prev = hidden

    def parameters(self):
        out = []
        for layer in self.layers:
            out.extend(layer.parameters())
        return out

    def forward(self, xs: np.ndarray, training: bool = False) -> np.ndarray:
        for layer in self.layers:
            xs = layer.forward(xs, training=training)
        return xs

    def backward(self, dhs: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dhs = layer.backward(dhs)
        return dhs
