"""Layer kernels with hand-written backward passes.

Activations are channels-last: images are ``(B, H, W, C)``, sequences
``(B, T, D)``. Every layer exposes

* ``build(input_shape, rng, dtype) -> output_shape`` (allocates parameters),
* ``forward(x, training, rng) -> (y, cache)``,
* ``backward(dy, cache, need_dx=True) -> (dx, grads)`` where ``grads`` is
  keyed like ``params``.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

Shape = tuple[int, ...]


def glorot_uniform(rng: np.random.Generator, shape: Shape, fan_in: int, fan_out: int,
                   dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form cannot overflow
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class Layer:
    kind = "Layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}

    def build(self, input_shape: Shape, rng: np.random.Generator, dtype) -> Shape:
        return self.output_shape(input_shape)

    def output_shape(self, input_shape: Shape) -> Shape:
        return input_shape

    def spec(self) -> dict:
        return {"kind": self.kind}

    def forward(self, x, training, rng):
        raise NotImplementedError

    def backward(self, dy, cache, need_dx=True):
        raise NotImplementedError

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.spec().items() if k != "kind")
        return f"{self.kind}({args})"


class Conv2D(Layer):
    """Valid-padding, stride-1 convolution via im2col."""

    kind = "Conv2D"

    def __init__(self, filters: int, kernel: tuple[int, int] = (3, 3)):
        super().__init__()
        self.filters = int(filters)
        self.kernel = tuple(int(k) for k in kernel)

    def spec(self) -> dict:
        return {"kind": self.kind, "filters": self.filters, "kernel": list(self.kernel)}

    def output_shape(self, input_shape: Shape) -> Shape:
        h, w, _ = input_shape
        kh, kw = self.kernel
        if h < kh or w < kw:
            raise ValueError(f"Conv2D kernel {self.kernel} larger than input {input_shape}")
        return (h - kh + 1, w - kw + 1, self.filters)

    def build(self, input_shape, rng, dtype):
        kh, kw = self.kernel
        cin = input_shape[-1]
        self.params = {
            "W": glorot_uniform(rng, (kh, kw, cin, self.filters), kh * kw * cin,
                                kh * kw * self.filters, dtype),
            "b": np.zeros(self.filters, dtype=dtype),
        }
        return self.output_shape(input_shape)

    @staticmethod
    def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
        # (B, H', W', C, kh, kw) view -> (B*H'*W', kh*kw*C) copy ordered (kh, kw, C)
        win = sliding_window_view(x, (kh, kw), axis=(1, 2))
        b, ho, wo, c = win.shape[:4]
        return win.transpose(0, 1, 2, 4, 5, 3).reshape(b * ho * wo, kh * kw * c)

    def forward(self, x, training, rng):
        kh, kw = self.kernel
        W, bias = self.params["W"], self.params["b"]
        b, h, w, c = x.shape
        ho, wo = h - kh + 1, w - kw + 1
        # replicated input planes (zero stride on channels): convolve one plane
        # with the channel-summed kernel
        shared = c > 1 and x.strides[-1] == 0
        if shared:
            cols = self._im2col(x[..., :1], kh, kw)
            y = cols @ W.sum(axis=2).reshape(-1, self.filters)
        else:
            cols = self._im2col(x, kh, kw)
            y = cols @ W.reshape(-1, self.filters)
        y += bias
        return y.reshape(b, ho, wo, self.filters), (x.shape, cols, shared)

    def backward(self, dy, cache, need_dx=True):
        x_shape, cols, shared = cache
        kh, kw = self.kernel
        W = self.params["W"]
        cin = W.shape[2]
        dy2 = dy.reshape(-1, self.filters)
        dW = cols.T @ dy2
        if shared:
            dW = np.repeat(dW.reshape(kh, kw, 1, self.filters), cin, axis=2)
        grads = {"W": dW.reshape(W.shape), "b": dy2.sum(axis=0)}
        if not need_dx:
            return None, grads
        # transposed convolution as a sum of shifted per-tap products
        b, h, w, _ = x_shape
        ho, wo = h - kh + 1, w - kw + 1
        dx = np.zeros(x_shape, dtype=dy.dtype)
        for i in range(kh):
            for j in range(kw):
                dx[:, i:i + ho, j:j + wo, :] += dy @ W[i, j].T
        return dx, grads


class ReLU(Layer):
    kind = "ReLU"

    def forward(self, x, training, rng):
        y = np.maximum(x, 0)
        return y, y > 0

    def backward(self, dy, cache, need_dx=True):
        return dy * cache, {}


class MaxPool2D(Layer):
    """Non-overlapping max pooling; trailing odd rows/columns are dropped.

    Gradient goes to the first maximal element of each window only, so the
    routed gradient sums to the upstream gradient.
    """

    kind = "MaxPool2D"

    def __init__(self, pool: int = 2):
        super().__init__()
        self.pool = int(pool)

    def spec(self) -> dict:
        return {"kind": self.kind, "pool": self.pool}

    def output_shape(self, input_shape: Shape) -> Shape:
        h, w, c = input_shape
        if h < self.pool or w < self.pool:
            raise ValueError(f"MaxPool2D window {self.pool} larger than input {input_shape}")
        return (h // self.pool, w // self.pool, c)

    def _taps(self, x):
        p = self.pool
        _, h, w, _ = x.shape
        ho, wo = h // p, w // p
        return [x[:, i:ho * p:p, j:wo * p:p, :] for i in range(p) for j in range(p)]

    def forward(self, x, training, rng):
        taps = self._taps(x)
        y = taps[0].copy()
        for t in taps[1:]:
            np.maximum(y, t, out=y)
        return y, (x, y)

    def backward(self, dy, cache, need_dx=True):
        x, y = cache
        p = self.pool
        _, h, w, _ = x.shape
        ho, wo = h // p, w // p
        dx = np.zeros(x.shape, dtype=dy.dtype)
        taken = np.zeros(y.shape, dtype=bool)
        for k, t in enumerate(self._taps(x)):
            # first maximal tap in scan order receives the gradient
            hit = (t == y) & ~taken
            taken |= hit
            i, j = divmod(k, p)
            dx[:, i:ho * p:p, j:wo * p:p, :] = dy * hit
        return dx, {}


class Dropout(Layer):
    """Inverted dropout: kept units are scaled by ``1/(1-rate)`` during training."""

    kind = "Dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = float(rate)

    def spec(self) -> dict:
        return {"kind": self.kind, "rate": self.rate}

    def forward(self, x, training, rng):
        if not training or self.rate == 0.0:
            return x, None
        keep = rng.random(x.shape, dtype=np.float32) >= self.rate
        mask = keep.astype(x.dtype) / x.dtype.type(1.0 - self.rate)
        return x * mask, mask

    def backward(self, dy, cache, need_dx=True):
        return (dy if cache is None else dy * cache), {}


class Flatten(Layer):
    kind = "Flatten"

    def output_shape(self, input_shape: Shape) -> Shape:
        return (int(np.prod(input_shape)),)

    def forward(self, x, training, rng):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dy, cache, need_dx=True):
        return dy.reshape(cache), {}


class RepeatVector(Layer):
    """(B, D) -> (B, n, D). The output is a broadcast view (zero stride on axis 1)."""

    kind = "RepeatVector"

    def __init__(self, n: int = 4):
        super().__init__()
        self.n = int(n)

    def spec(self) -> dict:
        return {"kind": self.kind, "n": self.n}

    def output_shape(self, input_shape: Shape) -> Shape:
        (d,) = input_shape
        return (self.n, d)

    def forward(self, x, training, rng):
        return np.broadcast_to(x[:, None, :], (x.shape[0], self.n, x.shape[1])), None

    def backward(self, dy, cache, need_dx=True):
        return dy.sum(axis=1), {}


class LSTM(Layer):
    """Standard LSTM, gate order (input, forget, cell candidate, output)."""

    kind = "LSTM"

    def __init__(self, units: int, return_sequences: bool = False, forget_bias: float = 1.0):
        super().__init__()
        self.units = int(units)
        self.return_sequences = bool(return_sequences)
        self.forget_bias = float(forget_bias)

    def spec(self) -> dict:
        return {"kind": self.kind, "units": self.units, "return_sequences": self.return_sequences}

    def output_shape(self, input_shape: Shape) -> Shape:
        t, _ = input_shape
        return (t, self.units) if self.return_sequences else (self.units,)

    def build(self, input_shape, rng, dtype):
        _, d = input_shape
        u = self.units
        bias = np.zeros(4 * u, dtype=dtype)
        bias[u:2 * u] = self.forget_bias
        self.params = {
            "Wx": glorot_uniform(rng, (d, 4 * u), d, 4 * u, dtype),
            "Wh": glorot_uniform(rng, (u, 4 * u), u, 4 * u, dtype),
            "b": bias,
        }
        return self.output_shape(input_shape)

    def forward(self, x, training, rng):
        Wx, Wh, bias = self.params["Wx"], self.params["Wh"], self.params["b"]
        b, t, d = x.shape
        u = self.units
        repeated = t > 1 and x.strides[1] == 0
        if repeated:
            # identical input at every step: project once
            xz = np.broadcast_to((x[:, 0] @ Wx)[:, None, :], (b, t, 4 * u))
        else:
            xz = (x.reshape(b * t, d) @ Wx).reshape(b, t, 4 * u)
        h = np.zeros((b, u), dtype=x.dtype)
        c = np.zeros((b, u), dtype=x.dtype)
        steps = []
        hs = np.empty((b, t, u), dtype=x.dtype)
        for s in range(t):
            z = xz[:, s] + h @ Wh + bias
            i = sigmoid(z[:, :u])
            f = sigmoid(z[:, u:2 * u])
            g = np.tanh(z[:, 2 * u:3 * u])
            o = sigmoid(z[:, 3 * u:])
            c_prev, h_prev = c, h
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            hs[:, s] = h
            steps.append((i, f, g, o, c_prev, h_prev, tc))
        y = hs if self.return_sequences else h
        return y, (x, repeated, steps)

    def backward(self, dy, cache, need_dx=True):
        x, repeated, steps = cache
        Wx, Wh = self.params["Wx"], self.params["Wh"]
        b, t, d = x.shape
        u = self.units
        dz_all = np.empty((b, t, 4 * u), dtype=dy.dtype)
        dWh = np.zeros_like(Wh)
        dh_next = np.zeros((b, u), dtype=dy.dtype)
        dc_next = np.zeros((b, u), dtype=dy.dtype)
        for s in reversed(range(t)):
            i, f, g, o, c_prev, h_prev, tc = steps[s]
            dh = dh_next + (dy[:, s] if self.return_sequences else (dy if s == t - 1 else 0.0))
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dz = dz_all[:, s]
            dz[:, :u] = dc * g * i * (1.0 - i)
            dz[:, u:2 * u] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * u:3 * u] = dc * i * (1.0 - g * g)
            dz[:, 3 * u:] = do * o * (1.0 - o)
            dc_next = dc * f
            dWh += h_prev.T @ dz
            dh_next = dz @ Wh.T
        if repeated:
            dWx = x[:, 0].T @ dz_all.sum(axis=1)
        else:
            dWx = x.reshape(b * t, d).T @ dz_all.reshape(b * t, 4 * u)
        grads = {"Wx": dWx, "Wh": dWh, "b": dz_all.sum(axis=(0, 1))}
        if not need_dx:
            return None, grads
        dx = (dz_all.reshape(b * t, 4 * u) @ Wx.T).reshape(b, t, d)
        return dx, grads


class Dense(Layer):
    kind = "Dense"

    def __init__(self, units: int):
        super().__init__()
        self.units = int(units)

    def spec(self) -> dict:
        return {"kind": self.kind, "units": self.units}

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 1:
            raise ValueError(f"Dense expects a flat input, got {input_shape}")
        return (self.units,)

    def build(self, input_shape, rng, dtype):
        (d,) = input_shape
        self.params = {
            "W": glorot_uniform(rng, (d, self.units), d, self.units, dtype),
            "b": np.zeros(self.units, dtype=dtype),
        }
        return self.output_shape(input_shape)

    def forward(self, x, training, rng):
        return x @ self.params["W"] + self.params["b"], x

    def backward(self, dy, cache, need_dx=True):
        grads = {"W": cache.T @ dy, "b": dy.sum(axis=0)}
        return (dy @ self.params["W"].T if need_dx else None), grads


class Softmax(Layer):
    kind = "Softmax"

    def forward(self, x, training, rng):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        p = e / e.sum(axis=1, keepdims=True)
        return p, p

    def backward(self, dy, cache, need_dx=True):
        p = cache
        return p * (dy - (dy * p).sum(axis=1, keepdims=True)), {}


LAYER_TYPES = {cls.kind: cls for cls in
               (Conv2D, ReLU, MaxPool2D, Dropout, Flatten, RepeatVector, LSTM, Dense, Softmax)}


def layer_from_spec(spec: dict) -> Layer:
    spec = dict(spec)
    kind = spec.pop("kind")
    try:
        cls = LAYER_TYPES[kind]
    except KeyError:
        raise ValueError(f"unknown layer kind {kind!r}") from None
    if kind == "Conv2D":
        spec["kernel"] = tuple(spec["kernel"])
    return cls(**spec)
