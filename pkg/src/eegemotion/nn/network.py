from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .layers import (LSTM, Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU,
                     RepeatVector, Softmax, layer_from_spec)

CE_EPSILON = 1e-12


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class StaleCacheError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Size knobs for the CNN-LSTM stack; defaults are the full-size model."""

    conv_filters: tuple[int, int] = (32, 64)
    lstm_units: tuple[int, int] = (256, 128)
    dense_units: int = 64
    dropout: float = 0.2
    repeat: int = 4
    kernel: int = 3
    pool: int = 2
    # conv -> pool -> conv instead of conv -> conv -> pool
    pool_between_convs: bool = False
    dense_activation: bool = True

    @classmethod
    def full(cls) -> "ModelConfig":
        return cls()

    @classmethod
    def reduced(cls) -> "ModelConfig":
        return cls(conv_filters=(4, 8), lstm_units=(16, 16), dense_units=16)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("conv_filters", "lstm_units"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_filters"] = list(self.conv_filters)
        d["lstm_units"] = list(self.lstm_units)
        return d


def default_layers(n_classes: int, cfg: ModelConfig) -> list[Layer]:
    k = (cfg.kernel, cfg.kernel)
    conv = [Conv2D(cfg.conv_filters[0], k), ReLU()]
    if cfg.pool_between_convs:
        conv += [MaxPool2D(cfg.pool), Conv2D(cfg.conv_filters[1], k), ReLU()]
    else:
        conv += [Conv2D(cfg.conv_filters[1], k), ReLU(), MaxPool2D(cfg.pool)]
    dense = [Dense(cfg.dense_units)] + ([ReLU()] if cfg.dense_activation else [])
    return conv + [
        Dropout(cfg.dropout),
        Flatten(),
        RepeatVector(cfg.repeat),
        LSTM(cfg.lstm_units[0], return_sequences=True),
        Dropout(cfg.dropout),
        LSTM(cfg.lstm_units[1], return_sequences=False),
        Dropout(cfg.dropout),
        *dense,
        Dropout(cfg.dropout),
        Dense(n_classes),
        Softmax(),
    ]


class Network:
    def __init__(self, layers: Sequence[Layer], input_shape: tuple[int, ...], n_classes: int,
                 dtype=np.float32, seed: Optional[int] = None):
        self.layers = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.n_classes = int(n_classes)
        self.dtype = np.dtype(dtype)
        # bumped on every in-place weight update; forward caches record it
        self.version = 0
        if not self.layers or not isinstance(self.layers[-1], Softmax):
            raise ValueError("network must end in Softmax")
        last_dense = next((l for l in reversed(self.layers) if isinstance(l, Dense)), None)
        if last_dense is None or last_dense.units != self.n_classes:
            raise ValueError(f"final Dense must have {self.n_classes} units")
        rng = np.random.default_rng(seed)
        self.shapes = [self.input_shape]
        shape = self.input_shape
        for i, layer in enumerate(self.layers):
            try:
                shape = tuple(layer.build(shape, rng, self.dtype))
            except ValueError as exc:
                raise ShapeError(f"layer {i} ({layer.kind}): {exc}") from exc
            self.shapes.append(shape)

    def __repr__(self) -> str:
        return f"Network({self.input_shape} -> {self.layers}, classes={self.n_classes})"

    def architecture(self) -> dict:
        return {"input_shape": list(self.input_shape), "n_classes": self.n_classes,
                "layers": [layer.spec() for layer in self.layers]}

    def fingerprint(self) -> str:
        """Hash of the layer-spec serialisation (architecture only, not weights)."""
        blob = json.dumps(self.architecture(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def named_params(self):
        for i, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                yield i, name, value

    def weights_fingerprint(self) -> str:
        h = hashlib.sha256()
        for i, name, value in self.named_params():
            h.update(f"{i}:{name}:{value.shape}:{value.dtype.str}".encode())
            h.update(np.ascontiguousarray(value).tobytes())
        return h.hexdigest()

    def n_params(self) -> int:
        return sum(v.size for _, _, v in self.named_params())

    def get_weights(self) -> list[dict[str, np.ndarray]]:
        return [{k: v.copy() for k, v in layer.params.items()} for layer in self.layers]

    def set_weights(self, weights: list[dict[str, np.ndarray]]) -> None:
        if len(weights) != len(self.layers):
            raise ValueError("weight list does not match layer count")
        for layer, w in zip(self.layers, weights):
            if set(w) != set(layer.params):
                raise ValueError(f"{layer.kind}: parameter names differ")
            for k, v in w.items():
                if v.shape != layer.params[k].shape:
                    raise ShapeError(f"{layer.kind}.{k}: shape {v.shape} != {layer.params[k].shape}")
                layer.params[k] = v.astype(self.dtype, copy=True)
        self.version += 1

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def astype(self, dtype) -> "Network":
        other = self.copy()
        other.dtype = np.dtype(dtype)
        for layer in other.layers:
            layer.params = {k: v.astype(dtype) for k, v in layer.params.items()}
        return other


def build_network(input_shape: tuple[int, ...], n_classes: int,
                  config: ModelConfig = ModelConfig(), seed: int = 0,
                  dtype=np.float32) -> Network:
    return Network(default_layers(n_classes, config), input_shape, n_classes, dtype, seed)


def network_from_architecture(arch: dict, dtype=np.float32) -> Network:
    layers = [layer_from_spec(s) for s in arch["layers"]]
    return Network(layers, tuple(arch["input_shape"]), arch["n_classes"], dtype)


@dataclass
class ForwardCache:
    net_id: int
    version: int
    training: bool
    layer_caches: list
    probabilities: np.ndarray


def forward(net: Network, batch: np.ndarray, training: bool = False,
            rng: Optional[np.random.Generator] = None) -> tuple[np.ndarray, ForwardCache]:
    """Run the stack; returns class probabilities ``(B, n_classes)`` and the backward cache."""
    x = np.asarray(batch)
    if x.ndim != len(net.input_shape) + 1 or tuple(x.shape[1:]) != net.input_shape:
        raise ShapeError(f"layer 0 ({net.layers[0].kind}): expected input (B, "
                         f"{', '.join(map(str, net.input_shape))}), got {x.shape}")
    if training and rng is None:
        raise ValueError("training forward needs an rng for dropout")
    x = x.astype(net.dtype, copy=False)
    caches = []
    for i, layer in enumerate(net.layers):
        if tuple(x.shape[1:]) != net.shapes[i]:
            raise ShapeError(f"layer {i} ({layer.kind}): expected input shape {net.shapes[i]}, "
                             f"got {tuple(x.shape[1:])}")
        x, cache = layer.forward(x, training, rng)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"non-finite activation after layer {i} ({layer.kind})")
        caches.append(cache)
    return x, ForwardCache(id(net), net.version, training, caches, x)


def loss_ce(probabilities: np.ndarray, onehot: np.ndarray) -> float:
    """Mean categorical cross-entropy."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(onehot, dtype=np.float64)
    if p.shape != y.shape or p.ndim != 2:
        raise ShapeError(f"probabilities {p.shape} and one-hot {y.shape} must be equal 2-D shapes")
    return float(np.mean(-np.sum(y * np.log(p + CE_EPSILON), axis=1)))


def one_hot(labels: np.ndarray, n_classes: int, dtype=np.float32) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    out = np.zeros((labels.shape[0], n_classes), dtype=dtype)
    out[np.arange(labels.shape[0]), labels] = 1
    return out


def backward(net: Network, cache: ForwardCache, onehot: np.ndarray,
             need_input_grad: bool = False):
    """Gradients of :func:`loss_ce` for every parameter, as ``[{name: grad}, ...]`` per layer.

    The Softmax + cross-entropy pair is differentiated jointly: ``dL/dlogits = (p - y) / B``.
    With ``need_input_grad`` the gradient w.r.t. the batch is returned as a second value.
    """
    if cache is None or not isinstance(cache, ForwardCache):
        raise StaleCacheError("missing forward cache")
    if cache.net_id != id(net) or cache.version != net.version:
        raise StaleCacheError("forward cache is stale: weights changed or a different network")
    p = cache.probabilities
    y = np.asarray(onehot, dtype=p.dtype)
    if y.shape != p.shape:
        raise ShapeError(f"one-hot shape {y.shape} != probabilities {p.shape}")
    grads: list[dict[str, np.ndarray]] = [{} for _ in net.layers]
    dy = (p - y) / p.shape[0]
    for i in range(len(net.layers) - 2, -1, -1):
        layer = net.layers[i]
        need_dx = i > 0 or need_input_grad
        dy, grads[i] = layer.backward(dy, cache.layer_caches[i], need_dx=need_dx)
    if need_input_grad:
        return grads, dy
    return grads


def as_input(net: Network, xb: np.ndarray) -> np.ndarray:
    """Expand single-plane instances ``(B, bins, frames)`` to the network's channel count.

    The expansion is a zero-stride broadcast view, which Conv2D recognises.
    """
    if xb.ndim == len(net.input_shape):
        xb = np.asarray(xb, dtype=net.dtype)
        return np.broadcast_to(xb[..., None], (*xb.shape, net.input_shape[-1]))
    return xb


def predict_proba(net: Network, X: np.ndarray, batch_size: int = 512) -> np.ndarray:
    out = np.empty((X.shape[0], net.n_classes), dtype=net.dtype)
    for start in range(0, X.shape[0], batch_size):
        xb = as_input(net, X[start:start + batch_size])
        out[start:start + batch_size], _ = forward(net, xb, training=False)
    return out


def predict(net: Network, X: np.ndarray, batch_size: int = 512) -> np.ndarray:
    """Argmax class per instance; ties resolve to the lowest class index.

    ``X`` is either full input tensors ``(n, bins, frames, 3)`` or single
    planes ``(n, bins, frames)`` which are replicated batch by batch.
    """
    return predict_proba(net, X, batch_size).argmax(axis=1)
