from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

Averaging = Literal["macro", "micro", "weighted"]
AVERAGINGS = ("macro", "micro", "weighted")


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns are predicted classes."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"confusion counts must be square, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ValueError("confusion counts must be integers")
        if np.any(c < 0):
            raise ValueError("confusion counts must be nonnegative")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def precision(self) -> np.ndarray:
        return _safe_div(np.diag(self.counts), self.counts.sum(axis=0))

    @property
    def recall(self) -> np.ndarray:
        return _safe_div(np.diag(self.counts), self.counts.sum(axis=1))

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def per_class_f1(self) -> np.ndarray:
        p, r = self.precision, self.recall
        return _safe_div(2 * p * r, p + r)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def to_csv(self, class_names: Sequence[str] | None = None) -> str:
        """Margin layout: rows are predicted labels, columns are actual labels.

        This is the transpose of ``counts``. The last column holds each
        predicted label's precision, the last row each actual label's recall.
        """
        names = list(class_names) if class_names is not None else [str(c) for c in range(self.n_classes)]
        t = self.counts.T
        buf = io.StringIO()
        buf.write("predicted\\actual," + ",".join(names) + ",precision\n")
        for i, name in enumerate(names):
            buf.write(f"{name}," + ",".join(str(int(v)) for v in t[i]) + f",{float(self.precision[i])!r}\n")
        buf.write("recall," + ",".join(repr(float(v)) for v in self.recall) + f",{self.accuracy!r}\n")
        return buf.getvalue()


def confusion(actual: Sequence[int], predicted: Sequence[int], classes: int) -> ConfusionMatrix:
    a = np.asarray(actual)
    p = np.asarray(predicted)
    if a.shape != p.shape or a.ndim != 1:
        raise ValueError(f"actual and predicted lengths differ: {a.shape} vs {p.shape}")
    for name, v in (("actual", a), ("predicted", p)):
        if v.size and (v.min() < 0 or v.max() >= classes):
            raise ValueError(f"{name} label out of range [0, {classes})")
    counts = np.zeros((classes, classes), dtype=np.int64)
    np.add.at(counts, (a.astype(np.int64), p.astype(np.int64)), 1)
    return ConfusionMatrix(counts)


def f1(conf: ConfusionMatrix, averaging: Averaging = "macro") -> float:
    """F1 in percent. Per-class F1 is 0 when precision + recall is 0."""
    if conf.total == 0:
        raise ValueError("F1 undefined on an empty confusion matrix")
    if averaging == "micro":
        # single-label: micro P = micro R = accuracy
        return 100.0 * conf.accuracy
    per_class = conf.per_class_f1()
    if averaging == "macro":
        return 100.0 * float(per_class.mean())
    if averaging == "weighted":
        return 100.0 * float(np.dot(per_class, conf.support) / conf.total)
    raise ValueError(f"unknown averaging {averaging!r}; expected one of {AVERAGINGS}")
