"""Rating-to-class label schemes.

``va4`` splits valence and arousal at one threshold into the quadrant classes
0=HVHA, 1=HVLA, 2=LVHA, 3=LVLA. ``valence3`` gives 0 for low valence, 1 for
non-emotional epochs and 2 for high valence; emotional epochs rated inside the
gap between the two valence thresholds are unlabelable and get dropped.
``discrete`` passes through a stored integer label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

from .records import EpochRecord

SchemeKind = Literal["va4", "valence3", "discrete"]

HVHA, HVLA, LVHA, LVLA = 0, 1, 2, 3
VA4_NAMES = ("HVHA", "HVLA", "LVHA", "LVLA")
LOW_VALENCE, NEUTRAL, HIGH_VALENCE = 0, 1, 2


def _check_rating(name: str, value: float) -> None:
    if not 1.0 <= value <= 9.0:
        raise ValueError(f"{name} rating {value} outside [1, 9]")


def label_va4(valence: float, arousal: float, threshold: float = 5.0) -> int:
    _check_rating("valence", valence)
    _check_rating("arousal", arousal)
    high_v = valence >= threshold
    high_a = arousal >= threshold
    if high_v:
        return HVHA if high_a else HVLA
    return LVHA if high_a else LVLA


def label_valence3(valence: Optional[float], emotional: bool,
                   low: float = 4.5, high: float = 5.5) -> Optional[int]:
    """Class for the three-way valence scheme, or ``None`` when the epoch is unlabelable."""
    if not emotional:
        return NEUTRAL
    if valence is None:
        raise ValueError("emotional epoch without a valence rating")
    _check_rating("valence", valence)
    if valence < low:
        return LOW_VALENCE
    if valence > high:
        return HIGH_VALENCE
    return None


@dataclass(frozen=True)
class LabelScheme:
    kind: SchemeKind = "valence3"
    va4_threshold: float = 5.0
    valence3_low: float = 4.5
    valence3_high: float = 5.5
    n_discrete: int = 0

    def __post_init__(self):
        if self.kind not in ("va4", "valence3", "discrete"):
            raise ValueError(f"unknown label scheme {self.kind!r}")
        if not self.valence3_low < self.valence3_high:
            raise ValueError("valence3_low must be below valence3_high")
        for v in (self.va4_threshold, self.valence3_low, self.valence3_high):
            _check_rating("threshold", v)
        if self.kind == "discrete" and self.n_discrete < 2:
            raise ValueError("discrete scheme needs n_discrete >= 2")

    @property
    def n_classes(self) -> int:
        return {"va4": 4, "valence3": 3}.get(self.kind, self.n_discrete)

    def label(self, record: EpochRecord) -> Optional[int]:
        if self.kind == "va4":
            if record.ratings is None:
                raise ValueError(
                    f"va4 needs ratings; subject {record.subject_id} trial {record.trial_id} has none")
            return label_va4(record.ratings.valence, record.ratings.arousal, self.va4_threshold)
        if self.kind == "valence3":
            valence = record.ratings.valence if record.ratings is not None else None
            return label_valence3(valence, record.emotional, self.valence3_low, self.valence3_high)
        if record.discrete_label is None:
            raise ValueError("discrete scheme needs discrete_label on every record")
        if not 0 <= record.discrete_label < self.n_discrete:
            raise ValueError(f"discrete label {record.discrete_label} out of range")
        return record.discrete_label

    def to_dict(self) -> dict:
        return {"kind": self.kind, "va4_threshold": self.va4_threshold,
                "valence3_low": self.valence3_low, "valence3_high": self.valence3_high,
                "n_discrete": self.n_discrete}
