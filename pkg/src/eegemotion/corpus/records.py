from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Geometry:
    """Epoch geometry of a dataset: channel count, samples per channel, rate."""

    name: str
    n_channels: int
    n_samples: int
    fs: float
    trials_per_subject: int = 1

    def to_dict(self) -> dict:
        return {"name": self.name, "n_channels": self.n_channels, "n_samples": self.n_samples,
                "fs": self.fs, "trials_per_subject": self.trials_per_subject}

    @classmethod
    def from_dict(cls, d: dict) -> "Geometry":
        return cls(d["name"], int(d["n_channels"]), int(d["n_samples"]), float(d["fs"]),
                   int(d.get("trials_per_subject", 1)))


DEAP = Geometry("deap", n_channels=32, n_samples=8064, fs=128.0, trials_per_subject=40)
SEED = Geometry("seed", n_channels=62, n_samples=16000, fs=200.0, trials_per_subject=15)
DENS = Geometry("dens", n_channels=128, n_samples=1751, fs=250.0, trials_per_subject=9)

GEOMETRIES = {g.name: g for g in (DEAP, SEED, DENS)}


def get_geometry(name: str) -> Geometry:
    try:
        return GEOMETRIES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown geometry {name!r}; expected one of {sorted(GEOMETRIES)}") from None


@dataclass(frozen=True)
class Ratings:
    valence: float
    arousal: float

    def __post_init__(self):
        for name in ("valence", "arousal"):
            v = getattr(self, name)
            if not 1.0 <= v <= 9.0:
                raise ValueError(f"{name} rating {v} outside [1, 9]")


@dataclass
class EpochRecord:
    subject_id: int
    trial_id: int
    fs: float
    channels: np.ndarray  # (n_channels, n_samples), float32
    ratings: Optional[Ratings] = None
    discrete_label: Optional[int] = None
    emotional: bool = True

    def __post_init__(self):
        if self.channels.ndim != 2:
            raise ValueError("channels must be a channel x sample matrix")
        if not self.fs > 0:
            raise ValueError(f"sampling rate must be positive, got {self.fs}")

    @property
    def channel_count(self) -> int:
        return self.channels.shape[0]

    @property
    def samples_per_channel(self) -> int:
        return self.channels.shape[1]

    def same_as(self, other: "EpochRecord") -> bool:
        return (self.subject_id == other.subject_id and self.trial_id == other.trial_id
                and self.fs == other.fs and self.ratings == other.ratings
                and self.discrete_label == other.discrete_label
                and self.emotional == other.emotional
                and self.channels.dtype == other.channels.dtype
                and np.array_equal(self.channels, other.channels))


@dataclass
class EpochSet:
    dataset_name: str
    geometry: Geometry
    records: list[EpochRecord] = field(default_factory=list)
    scheme: str = "valence3"
    seed: Optional[int] = None

    def __post_init__(self):
        g = self.geometry
        for i, r in enumerate(self.records):
            if (r.channel_count, r.samples_per_channel, r.fs) != (g.n_channels, g.n_samples, g.fs):
                raise ValueError(
                    f"record {i} has geometry ({r.channel_count}, {r.samples_per_channel}, {r.fs}),"
                    f" expected ({g.n_channels}, {g.n_samples}, {g.fs})")

    def __len__(self) -> int:
        return len(self.records)

    def same_as(self, other: "EpochSet") -> bool:
        return (self.dataset_name == other.dataset_name and self.geometry == other.geometry
                and self.scheme == other.scheme and self.seed == other.seed
                and len(self) == len(other)
                and all(a.same_as(b) for a, b in zip(self.records, other.records)))
