"""Deterministic synthetic EEG with class-specific spectral signatures.

Each class owns a centre frequency, spread evenly over 6-30 Hz by default. A channel is an
amplitude-modulated oscillation at that frequency on top of unit-variance
1/f background noise, mixed at a configurable SNR. Ratings are drawn so that
the label scheme matching the class count recovers the class: three classes
follow the valence3 layout (class 1 is the non-emotional set), four classes
follow the va4 quadrants, anything else carries only a discrete label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .labels import HVHA, HVLA, LVHA, LVLA, NEUTRAL
from .records import EpochRecord, EpochSet, Geometry, Ratings

MICROVOLT_SCALE = 10.0
DEFAULT_SNR_DB = -10.0


@dataclass(frozen=True)
class SynthConfig:
    snr_db: float = DEFAULT_SNR_DB
    f_low: float = 6.0
    f_high: float = 30.0
    freq_jitter_hz: float = 0.5
    am_depth: float = 0.5
    channel_gain_spread: float = 0.25


def class_frequencies(classes: int, cfg: SynthConfig = SynthConfig()) -> np.ndarray:
    if classes < 2:
        raise ValueError("need at least two classes")
    return np.linspace(cfg.f_low, cfg.f_high, classes)


def pink_noise(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """Rows of 1/f-power noise with zero mean and unit variance."""
    n = shape[-1]
    n_bins = n // 2 + 1
    # complex white spectrum drawn directly; shaping to 1/f power, no DC
    spectrum = np.empty((*shape[:-1], n_bins), dtype=complex)
    spectrum.real = rng.standard_normal(spectrum.shape, dtype=np.float32)
    spectrum.imag = rng.standard_normal(spectrum.shape, dtype=np.float32)
    k = np.arange(n_bins, dtype=float)
    shaping = np.zeros_like(k)
    shaping[1:] = 1.0 / np.sqrt(k[1:])
    noise = np.fft.irfft(spectrum * shaping, n=n, axis=-1)
    noise -= noise.mean(axis=-1, keepdims=True)
    noise /= noise.std(axis=-1, keepdims=True)
    return noise


def _ratings_for(cls: int, classes: int, rng: np.random.Generator) -> tuple[Optional[Ratings], bool]:
    low = lambda: float(rng.uniform(1.0, 4.4))   # noqa: E731
    high = lambda: float(rng.uniform(5.6, 9.0))  # noqa: E731
    if classes == 3:
        if cls == NEUTRAL:
            return None, False
        valence = low() if cls == 0 else high()
        return Ratings(valence, float(rng.uniform(1.0, 9.0))), True
    if classes == 4:
        valence = high() if cls in (HVHA, HVLA) else low()
        arousal = high() if cls in (HVHA, LVHA) else low()
        assert cls in (HVHA, HVLA, LVHA, LVLA)
        return Ratings(valence, arousal), True
    return None, True


def synth_record(geometry: Geometry, cls: int, classes: int, index: int, seed: int,
                 cfg: SynthConfig = SynthConfig()) -> EpochRecord:
    rng = np.random.default_rng([seed, index])
    c, n, fs = geometry.n_channels, geometry.n_samples, geometry.fs
    t = np.arange(n) / fs
    f0 = class_frequencies(classes, cfg)[cls] + rng.uniform(-cfg.freq_jitter_hz, cfg.freq_jitter_hz)
    f_am = rng.uniform(0.2, 1.0)
    am_phase = rng.uniform(0, 2 * np.pi)
    envelope = 1.0 + cfg.am_depth * np.sin(2 * np.pi * f_am * t + am_phase)
    # sine of amplitude A under the envelope has power A^2/2 * (1 + depth^2/2)
    amp = np.sqrt(2 * 10 ** (cfg.snr_db / 10) / (1 + cfg.am_depth**2 / 2))
    phases = rng.uniform(0, 2 * np.pi, size=(c, 1))
    gains = rng.uniform(1 - cfg.channel_gain_spread, 1 + cfg.channel_gain_spread, size=(c, 1))
    # sin(wt + phi) expanded so only two length-n sine evaluations are needed
    wt = 2 * np.pi * f0 * t
    carrier = np.sin(wt) * np.cos(phases) + np.cos(wt) * np.sin(phases)
    signal = (amp * gains) * (envelope * carrier)
    x = MICROVOLT_SCALE * (signal + pink_noise(rng, (c, n)))
    ratings, emotional = _ratings_for(cls, classes, rng)
    return EpochRecord(
        subject_id=index // geometry.trials_per_subject,
        trial_id=index % geometry.trials_per_subject,
        fs=fs,
        channels=x.astype(np.float32),
        ratings=ratings,
        discrete_label=cls,
        emotional=emotional,
    )


def scheme_for_classes(classes: int) -> str:
    return {3: "valence3", 4: "va4"}.get(classes, "discrete")


def synth_generate(geometry: Geometry, classes: int, per_class: int, seed: int,
                   cfg: SynthConfig = SynthConfig()) -> EpochSet:
    """``classes * per_class`` epochs, classes interleaved (0, 1, .., 0, 1, ..)."""
    if classes < 2:
        raise ValueError("need at least two classes")
    if per_class < 1:
        raise ValueError("need at least one epoch per class")
    records = [synth_record(geometry, i % classes, classes, i, seed, cfg)
               for i in range(classes * per_class)]
    return EpochSet(f"synthetic-{geometry.name}", geometry, records,
                    scheme=scheme_for_classes(classes), seed=seed)
