from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..signal_core import (BiquadCascade, ScalingMode, StftPlan, TimeSeries, filter_array,
                           power_array, scale_power, stft_array)
from .labels import LabelScheme
from .records import EpochSet

N_PLANES = 3


@dataclass(frozen=True)
class InstanceTensor:
    values: np.ndarray  # (bins, frames, 3) float32
    label: Optional[int] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def replicate_planes(planes: np.ndarray) -> np.ndarray:
    """(..., bins, frames) -> (..., bins, frames, 3) with identical planes."""
    planes = np.asarray(planes, dtype=np.float32)
    return np.ascontiguousarray(np.repeat(planes[..., None], N_PLANES, axis=-1))


def epoch_labels(epochs: EpochSet, scheme: LabelScheme) -> list[Optional[int]]:
    return [scheme.label(r) for r in epochs.records]


def flatten(epochs: EpochSet, scheme: LabelScheme) -> list[tuple[TimeSeries, int]]:
    """One (channel signal, class) instance per labelable (epoch, channel), epoch-major."""
    if not epochs.records:
        raise ValueError("cannot flatten an empty epoch set")
    out = []
    for record, label in zip(epochs.records, epoch_labels(epochs, scheme)):
        if label is None:
            continue
        for row in record.channels:
            out.append((TimeSeries(row, record.fs), label))
    return out


def featurize(instance: TimeSeries, plan: StftPlan, scaling: ScalingMode = "log+minmax",
              label: Optional[int] = None) -> InstanceTensor:
    power = power_array(stft_array(instance.samples, plan))
    return InstanceTensor(replicate_planes(scale_power(power, scaling)), label)


def feature_shape(n_samples: int, plan: StftPlan) -> tuple[int, int, int]:
    bins, frames = plan.output_shape(n_samples)
    return bins, frames, N_PLANES


def truncate(epochs: EpochSet, max_samples: int) -> EpochSet:
    """Keep the first ``max_samples`` of every channel (no-op when already short enough)."""
    g = epochs.geometry
    if g.n_samples <= max_samples:
        return epochs
    geometry = replace(g, n_samples=max_samples)
    records = [replace(r, channels=r.channels[:, :max_samples]) for r in epochs.records]
    return EpochSet(epochs.dataset_name, geometry, records, epochs.scheme, epochs.seed)


def featurize_epochset(epochs: EpochSet, scheme: LabelScheme, plan: StftPlan,
                       scaling: ScalingMode = "log+minmax",
                       bandpass: Optional[BiquadCascade] = None) -> tuple[np.ndarray, np.ndarray]:
    """Bulk flatten + featurize.

    Returns single-plane features ``(n_instances, bins, frames)`` as float32 and
    the int64 labels, in the same epoch-major / channel-minor order as
    :func:`flatten`. Use :func:`replicate_planes` to obtain the 3-plane
    classifier input; it is deferred here to keep memory at a third.
    """
    if not epochs.records:
        raise ValueError("cannot featurize an empty epoch set")
    labels = epoch_labels(epochs, scheme)
    kept = [(r, y) for r, y in zip(epochs.records, labels) if y is not None]
    g = epochs.geometry
    bins, frames = plan.output_shape(g.n_samples)
    X = np.empty((len(kept) * g.n_channels, bins, frames), dtype=np.float32)
    y = np.empty(len(kept) * g.n_channels, dtype=np.int64)
    for i, (record, label) in enumerate(kept):
        signals = record.channels.astype(np.float64)
        if bandpass is not None:
            signals = filter_array(bandpass, signals)
        power = power_array(stft_array(signals, plan))
        sl = slice(i * g.n_channels, (i + 1) * g.n_channels)
        X[sl] = scale_power(power, scaling)
        y[sl] = label
    return X, y
