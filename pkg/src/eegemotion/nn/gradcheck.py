"""Central finite-difference checks for every layer type, in float64.

Each layer kind is checked in isolation against the scalar loss
``sum(r * layer(x))`` for a fixed random ``r``, and the full tiny network is
checked parameter by parameter against cross-entropy. Dropout masks are held
fixed by reseeding the dropout rng before every evaluation.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .layers import (LSTM, Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU,
                     RepeatVector, Softmax)
from .network import ModelConfig, Network, backward, build_network, forward, loss_ce, one_hot

STEP = 1e-5
TOLERANCE = 1e-4
# floor on the relative-error denominator: float64 central differences at
# h=1e-5 on an O(1) loss carry ~1e-11 absolute round-off, so entries below
# 1e-6 are effectively compared at 1e-10 absolute
DENOM_FLOOR = 1e-6

CHECKED_KINDS = ("Conv2D", "ReLU", "MaxPool2D", "Dropout", "Flatten", "RepeatVector", "LSTM",
                 "Dense", "Softmax+CE")

TINY_INPUT = (8, 6, 3)
TINY_CLASSES = 3
TINY_BATCH = 2


def tiny_config() -> ModelConfig:
    return ModelConfig(conv_filters=(2, 2), lstm_units=(5, 4), dense_units=4, dropout=0.2)


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = DENOM_FLOOR) -> float:
    a, n = np.asarray(analytic, dtype=float), np.asarray(numeric, dtype=float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0


def numeric_gradient(loss: Callable[[], float], arr: np.ndarray, h: float = STEP) -> np.ndarray:
    """Central differences of ``loss`` w.r.t. every entry of ``arr`` (perturbed in place)."""
    grad = np.zeros(arr.shape, dtype=float)
    for idx in np.ndindex(arr.shape):
        orig = arr[idx]
        arr[idx] = orig + h
        plus = loss()
        arr[idx] = orig - h
        minus = loss()
        arr[idx] = orig
        grad[idx] = (plus - minus) / (2 * h)
    return grad


@dataclass
class GradcheckReport:
    errors: dict[str, float] = field(default_factory=dict)
    tolerance: float = TOLERANCE

    def record(self, kind: str, err: float) -> None:
        self.errors[kind] = max(self.errors.get(kind, 0.0), err)

    @property
    def failed(self) -> list[str]:
        return [k for k, e in self.errors.items() if not e < self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failed

    def lines(self) -> list[str]:
        return [f"{kind:<14s} max_rel_err={err:.3e}  {'PASS' if err < self.tolerance else 'FAIL'}"
                for kind, err in self.errors.items()]


@contextmanager
def _corrupted(layers: list[Layer], kind: Optional[str]) -> Iterator[None]:
    """Fault injection: scale the backward output of every layer of ``kind`` by 1.01."""
    patched = [l for l in layers if kind is not None and l.kind == kind]
    for layer in patched:
        original = layer.backward

        def bad(dy, cache, need_dx=True, _orig=original):
            dx, grads = _orig(dy, cache, need_dx)
            return (None if dx is None else dx * 1.01), {k: g * 1.01 for k, g in grads.items()}
        layer.backward = bad
    try:
        yield
    finally:
        for layer in patched:
            del layer.backward


def _check_layer(layer: Layer, input_shape: tuple[int, ...], rng: np.random.Generator,
                 fault: Optional[str] = None, training: bool = False,
                 x: Optional[np.ndarray] = None) -> float:
    layer.build(input_shape, rng, np.float64)
    if x is None:
        x = rng.standard_normal((TINY_BATCH, *input_shape))
    drop_seed = int(rng.integers(2**31))

    def run(inp):
        return layer.forward(inp, training, np.random.default_rng(drop_seed))

    y, _ = run(x)
    r = rng.standard_normal(y.shape)

    def loss() -> float:
        return float(np.sum(r * run(x)[0]))

    with _corrupted([layer], fault):
        _, cache = run(x)
        dx, grads = layer.backward(r, cache, need_dx=True)
    x = np.ascontiguousarray(x)  # writable, non-broadcast copy for perturbation
    err = relative_error(dx, numeric_gradient(lambda: float(np.sum(r * run(x)[0])), x))
    for name, value in layer.params.items():
        err = max(err, relative_error(grads[name], numeric_gradient(loss, value)))
    return err


def _check_softmax_ce(rng: np.random.Generator, fault: Optional[str]) -> float:
    z = rng.standard_normal((TINY_BATCH, TINY_CLASSES))
    y = one_hot(rng.integers(0, TINY_CLASSES, TINY_BATCH), TINY_CLASSES, np.float64)
    softmax = Softmax()
    p, _ = softmax.forward(z, False, None)
    analytic = (p - y) / z.shape[0]
    if fault == "Softmax+CE":
        analytic = analytic * 1.01
    numeric = numeric_gradient(lambda: loss_ce(softmax.forward(z, False, None)[0], y), z)
    return relative_error(analytic, numeric)


def check_isolated(report: GradcheckReport, rng: np.random.Generator,
                   fault: Optional[str] = None) -> None:
    record = report.record
    record("Conv2D", _check_layer(Conv2D(3), (6, 5, 2), rng, fault))
    record("ReLU", _check_layer(ReLU(), (4, 3, 2), rng, fault))
    record("MaxPool2D", _check_layer(MaxPool2D(2), (5, 7, 2), rng, fault))
    record("Dropout", _check_layer(Dropout(0.3), (4, 6), rng, fault, training=True))
    record("Flatten", _check_layer(Flatten(), (3, 2, 2), rng, fault))
    record("RepeatVector", _check_layer(RepeatVector(4), (5,), rng, fault))
    record("LSTM", _check_layer(LSTM(5, return_sequences=True), (4, 3), rng, fault))
    record("LSTM", _check_layer(LSTM(4, return_sequences=False), (3, 5), rng, fault))
    repeated = np.broadcast_to(rng.standard_normal((TINY_BATCH, 1, 6)), (TINY_BATCH, 4, 6))
    record("LSTM", _check_layer(LSTM(3, return_sequences=False), (4, 6), rng, fault, x=repeated))
    record("Dense", _check_layer(Dense(4), (6,), rng, fault))
    record("Softmax+CE", _check_softmax_ce(rng, fault))


def check_network(report: GradcheckReport, net: Network, rng: np.random.Generator,
                  fault: Optional[str] = None) -> None:
    """Every parameter of ``net`` against cross-entropy finite differences.

    Biases are randomised first: with zero biases a dead conv stack feeds exact
    zeros forward and lands later ReLUs on their kink, where finite differences
    are meaningless.
    """
    for layer in net.layers:
        if "b" in layer.params:
            layer.params["b"] = rng.normal(0.0, 0.5, layer.params["b"].shape)
    x = rng.standard_normal((TINY_BATCH, *net.input_shape))
    y = one_hot(rng.integers(0, net.n_classes, TINY_BATCH), net.n_classes, np.float64)
    drop_seed = int(rng.integers(2**31))

    def loss() -> float:
        p, _ = forward(net, x, training=True, rng=np.random.default_rng(drop_seed))
        return loss_ce(p, y)

    with _corrupted(net.layers, fault):
        p, cache = forward(net, x, training=True, rng=np.random.default_rng(drop_seed))
        grads = backward(net, cache, y)
    if fault == "Softmax+CE":
        return  # the joint softmax/CE step is not a layer backward; covered in isolation
    for i, name, value in list(net.named_params()):
        numeric = numeric_gradient(loss, value)
        report.record(net.layers[i].kind, relative_error(grads[i][name], numeric))


def run_gradcheck(seed: int = 0, fault: Optional[str] = None) -> GradcheckReport:
    """Isolated checks for all layer kinds plus the tiny end-to-end network (float64)."""
    if fault is not None and fault not in CHECKED_KINDS:
        raise ValueError(f"unknown fault target {fault!r}; expected one of {CHECKED_KINDS}")
    rng = np.random.default_rng(seed)
    report = GradcheckReport()
    check_isolated(report, rng, fault)
    net = build_network(TINY_INPUT, TINY_CLASSES, tiny_config(), seed=seed, dtype=np.float64)
    check_network(report, net, rng, fault)
    report.errors = {k: report.errors[k] for k in CHECKED_KINDS}
    return report
