from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .network import (Network, NonFiniteError, as_input, backward, forward, loss_ce, one_hot,
                      predict_proba)
from .optim import Adam

log = logging.getLogger(__name__)

EvaluateFn = Callable[[Network, np.ndarray, np.ndarray], tuple[float, float]]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 256
    max_epochs: int = 100
    patience: int = 30
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 0.5:
            raise ValueError(f"val_fraction must lie in (0, 0.5), got {self.val_fraction}")
        if not 1 <= self.patience <= self.max_epochs:
            raise ValueError("patience must lie in [1, max_epochs]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_accuracy: float = -1.0
    best_weights_fingerprint: str = ""
    early_stopped: bool = False

    def column(self, name: str) -> list[float]:
        return [getattr(e, name) for e in self.epochs]


def stratified_split(labels: np.ndarray, n_classes: int, fraction: float,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded carve-out of ``fraction`` of the indices; returns (train_idx, val_idx)."""
    labels = np.asarray(labels)
    train, val = [], []
    for c in range(n_classes):
        idx = np.flatnonzero(labels == c)
        if idx.size == 0:
            raise ValueError(f"class {c} absent from the training split; cannot stratify")
        idx = rng.permutation(idx)
        n_val = int(round(fraction * idx.size)) if idx.size >= 2 else 0
        n_val = min(max(n_val, 1 if idx.size >= 2 else 0), idx.size - 1)
        val.append(idx[:n_val])
        train.append(idx[n_val:])
    train_idx, val_idx = np.sort(np.concatenate(train)), np.sort(np.concatenate(val))
    if val_idx.size == 0:
        raise ValueError("validation split is empty")
    return train_idx, val_idx


def evaluate(net: Network, X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    p = predict_proba(net, X)
    loss = loss_ce(p, one_hot(y, net.n_classes))
    acc = float(np.mean(p.argmax(axis=1) == y))
    return loss, acc


def train(net: Network, X: np.ndarray, y: np.ndarray, config: TrainConfig = TrainConfig(),
          evaluate_fn: Optional[EvaluateFn] = None) -> tuple[Network, TrainHistory]:
    """Mini-batch Adam with early stopping on val_loss and best-val_accuracy checkpointing.

    ``net`` is trained in place; the returned network is a separate copy
    holding the checkpointed weights. ``evaluate_fn`` replaces the validation
    metric computation (used to drive the stopping logic with a fixed trace).
    """
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} instances but {y.shape[0]} labels")
    if y.min() < 0 or y.max() >= net.n_classes:
        raise ValueError(f"labels must lie in [0, {net.n_classes})")
    evaluate_fn = evaluate_fn or evaluate

    split_rng = np.random.default_rng([config.seed, 0])
    shuffle_rng = np.random.default_rng([config.seed, 1])
    dropout_rng = np.random.default_rng([config.seed, 2])
    train_idx, val_idx = stratified_split(y, net.n_classes, config.val_fraction, split_rng)
    X_val, y_val = X[val_idx], y[val_idx]

    opt = Adam(net, config.learning_rate, config.beta1, config.beta2, config.epsilon)
    history = TrainHistory()
    best_weights = net.get_weights()
    best_val_loss = np.inf
    wait = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(train_idx)
        loss_sum = 0.0
        correct = 0
        for start in range(0, order.size, config.batch_size):
            batch = order[start:start + config.batch_size]
            xb = as_input(net, X[batch])
            yb = one_hot(y[batch], net.n_classes, net.dtype)
            p, cache = forward(net, xb, training=True, rng=dropout_rng)
            batch_loss = loss_ce(p, yb)
            if not np.isfinite(batch_loss):
                raise NonFiniteError(f"non-finite training loss at epoch {epoch}")
            loss_sum += batch_loss * batch.size
            correct += int(np.sum(p.argmax(axis=1) == y[batch]))
            opt.step(net, backward(net, cache, yb))
        val_loss, val_acc = evaluate_fn(net, X_val, y_val)
        if not np.isfinite(val_loss):
            raise NonFiniteError(f"non-finite validation loss at epoch {epoch}")
        stats = EpochStats(epoch, loss_sum / order.size, correct / order.size,
                           float(val_loss), float(val_acc))
        history.epochs.append(stats)
        log.debug("epoch %d %s", epoch, stats)

        if val_acc > history.best_val_accuracy:
            history.best_val_accuracy = float(val_acc)
            history.best_epoch = epoch
            best_weights = net.get_weights()
            history.best_weights_fingerprint = net.weights_fingerprint()
        if val_loss < best_val_loss:
            best_val_loss = val_loss
            wait = 0
        else:
            wait += 1
            if wait >= config.patience:
                history.early_stopped = True
                break
    history.stopped_epoch = len(history.epochs)

    best = net.copy()
    best.set_weights(best_weights)
    return best, history
