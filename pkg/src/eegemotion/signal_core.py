"""DSP kernel: Butterworth bandpass design, causal SOS filtering, STFT and spectrograms.

All computation runs in float64. Arrays are plain numpy; the small dataclasses
below only carry the metadata (sampling rate, frame geometry) that the
downstream featurizer needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import sosfilt

WindowKind = Literal["hann", "rectangular", "hamming"]
ScalingMode = Literal["raw", "log", "log+minmax"]

SCALING_MODES = ("raw", "log", "log+minmax")
LOG_EPSILON = 1e-10


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("TimeSeries needs a non-empty 1-D sample array")
        if not self.fs > 0:
            raise ValueError(f"sampling rate must be positive, got {self.fs}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("TimeSeries contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class StftPlan:
    frame_size: int
    hop: int
    window: WindowKind = "hann"

    def __post_init__(self):
        if self.frame_size < 2:
            raise ValueError(f"frame size must be >= 2, got {self.frame_size}")
        if not 1 <= self.hop <= self.frame_size:
            raise ValueError(f"hop must lie in [1, frame_size], got {self.hop}")
        if self.window not in ("hann", "rectangular", "hamming"):
            raise ValueError(f"unknown window kind {self.window!r}")

    @classmethod
    def from_seconds(cls, fs: float, window_s: float = 0.5, hop_s: float = 0.25,
                     window: WindowKind = "hann") -> "StftPlan":
        # half-up rounding: 0.25 s at 250 Hz must give 63, not 62
        return cls(_round_half_up(window_s * fs), _round_half_up(hop_s * fs), window)

    @property
    def n_bins(self) -> int:
        return self.frame_size // 2 + 1

    def n_frames(self, length: int) -> int:
        if length < self.frame_size:
            raise ValueError(
                f"signal shorter than frame: length {length} < frame size {self.frame_size}")
        return (length - self.frame_size) // self.hop + 1

    def output_shape(self, length: int) -> tuple[int, int]:
        """(bins, frames) of the spectrogram for a signal of ``length`` samples."""
        return self.n_bins, self.n_frames(length)


@dataclass(frozen=True)
class ComplexStft:
    """STFT coefficients, ``coefficients[m, k]`` for frame m and bin k."""

    coefficients: np.ndarray
    frame_size: int
    hop: int
    fs: float

    @property
    def n_frames(self) -> int:
        return self.coefficients.shape[-2]

    @property
    def n_bins(self) -> int:
        return self.coefficients.shape[-1]


@dataclass(frozen=True)
class Spectrogram:
    """Power image laid out bins x frames (frequency on the vertical axis)."""

    power: np.ndarray
    df: float
    dt: float


@dataclass(frozen=True)
class FilterSpec:
    order: int
    low_hz: float
    high_hz: float
    fs: float

    def validate(self) -> None:
        if self.order < 1:
            raise ValueError(f"invalid filter order {self.order}: must be >= 1")
        if not self.fs > 0:
            raise ValueError(f"invalid sampling rate {self.fs}")
        nyquist = self.fs / 2
        if not self.low_hz > 0:
            raise ValueError(f"invalid cutoffs: low_hz={self.low_hz} must be > 0")
        if not self.low_hz < self.high_hz:
            raise ValueError(
                f"invalid cutoffs: low_hz={self.low_hz} must be < high_hz={self.high_hz}")
        if not self.high_hz < nyquist:
            raise ValueError(
                f"invalid cutoffs: high_hz={self.high_hz} must be < Nyquist={nyquist}")


@dataclass(frozen=True)
class BiquadCascade:
    """Second-order sections, rows ``(b0, b1, b2, 1, a1, a2)``, plus an output gain."""

    sections: np.ndarray
    gain: float
    fs: float = field(default=float("nan"))

    @property
    def n_sections(self) -> int:
        return self.sections.shape[0]

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(s[3:]) for s in self.sections])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def as_sos(self) -> np.ndarray:
        """SOS matrix with the gain folded into the first section."""
        sos = self.sections.copy()
        sos[0, :3] *= self.gain
        return sos

    def frequency_response(self, freqs_hz: np.ndarray, fs: float | None = None) -> np.ndarray:
        fs = self.fs if fs is None else fs
        z1 = np.exp(-2j * np.pi * np.asarray(freqs_hz, dtype=float) / fs)
        h = np.full(z1.shape, self.gain, dtype=complex)
        for b0, b1, b2, a0, a1, a2 in self.sections:
            h *= (b0 + b1 * z1 + b2 * z1**2) / (a0 + a1 * z1 + a2 * z1**2)
        return h


# --------------------------------------------------------------------------- filtering

def design_bandpass(spec: FilterSpec) -> BiquadCascade:
    """Digital Butterworth bandpass of ``2 * order`` poles as ``order`` biquads.

    Analog lowpass prototype -> lowpass-to-bandpass transform at the prewarped
    edges -> bilinear transform. Each section carries one zero at z=1 and one
    at z=-1; the gain normalises the response to unity at the digital image of
    the geometric centre frequency, where the analog response is exactly 1.
    """
    spec.validate()
    n, fs = spec.order, float(spec.fs)
    two_fs = 2.0 * fs
    w_lo = two_fs * math.tan(math.pi * spec.low_hz / fs)
    w_hi = two_fs * math.tan(math.pi * spec.high_hz / fs)
    bw = w_hi - w_lo
    w0 = math.sqrt(w_lo * w_hi)

    # prototype poles in the upper half plane plus the real pole for odd orders
    proto = [np.exp(1j * math.pi * (2 * k + n - 1) / (2 * n)) for k in range(1, n // 2 + 1)]
    analog_pairs: list[tuple[complex, complex]] = []
    for p in proto:
        half = p * bw / 2
        root = np.sqrt(half * half - w0 * w0 + 0j)
        # each upper-half prototype pole yields two poles; their conjugates come
        # from the mirrored prototype pole, so each one pairs with its conjugate
        for s in (half + root, half - root):
            analog_pairs.append((s, np.conj(s)))
    if n % 2:
        half = -bw / 2
        root = np.sqrt(complex(half * half - w0 * w0))
        analog_pairs.append((half + root, half - root))

    sections = []
    for s1, s2 in analog_pairs:
        z1 = (two_fs + s1) / (two_fs - s1)
        z2 = (two_fs + s2) / (two_fs - s2)
        a1 = -(z1 + z2).real
        a2 = (z1 * z2).real
        sections.append([1.0, 0.0, -1.0, 1.0, a1, a2])
    cascade = BiquadCascade(np.array(sections, dtype=float), 1.0, fs)

    f_center = fs / math.pi * math.atan(w0 / two_fs)
    gain = 1.0 / abs(cascade.frequency_response(np.array([f_center]))[0])
    return BiquadCascade(cascade.sections, gain, fs)


def apply_filter(cascade: BiquadCascade, x: TimeSeries) -> TimeSeries:
    """Single causal pass through the cascade, zero initial state."""
    return TimeSeries(filter_array(cascade, x.samples), x.fs)


def filter_array(cascade: BiquadCascade, x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vectorised :func:`apply_filter` over any array of signals along ``axis``."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input sample")
    return sosfilt(cascade.as_sos(), x, axis=axis)


# --------------------------------------------------------------------------- spectra

def make_window(kind: WindowKind, n: int) -> np.ndarray:
    """Periodic window of length ``n``."""
    if kind == "rectangular":
        return np.ones(n)
    phase = 2.0 * np.pi * np.arange(n) / n
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(phase)
    if kind == "hamming":
        return 0.54 - 0.46 * np.cos(phase)
    raise ValueError(f"unknown window kind {kind!r}")


def dft(frame: np.ndarray) -> np.ndarray:
    """Non-negative-frequency DFT bins ``0 .. N//2`` of a real frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.shape[0] < 2:
        raise ValueError("dft needs a 1-D frame of length >= 2")
    return np.fft.rfft(frame)


def frame_signal(x: np.ndarray, plan: StftPlan) -> np.ndarray:
    """View of shape ``(..., frames, N)``; trailing samples that do not fill a frame are dropped."""
    length = x.shape[-1]
    n_frames = plan.n_frames(length)
    frames = sliding_window_view(x, plan.frame_size, axis=-1)[..., ::plan.hop, :]
    return frames[..., :n_frames, :]


def stft_array(x: np.ndarray, plan: StftPlan) -> np.ndarray:
    """STFT of one or many signals along the last axis -> ``(..., frames, bins)``."""
    x = np.asarray(x, dtype=np.float64)
    frames = frame_signal(x, plan)
    if plan.window != "rectangular":
        frames = frames * make_window(plan.window, plan.frame_size)
    return np.fft.rfft(frames, axis=-1)


def stft(x: TimeSeries, plan: StftPlan) -> ComplexStft:
    return ComplexStft(stft_array(x.samples, plan), plan.frame_size, plan.hop, x.fs)


def power_array(coefficients: np.ndarray) -> np.ndarray:
    """``|S|^2`` transposed from ``(..., frames, bins)`` to ``(..., bins, frames)``."""
    power = coefficients.real**2 + coefficients.imag**2
    return np.swapaxes(power, -1, -2)


def spectrogram(s: ComplexStft) -> Spectrogram:
    return Spectrogram(power_array(s.coefficients), df=s.fs / s.frame_size, dt=s.hop / s.fs)


def log_normalize_array(power: np.ndarray, epsilon: float = LOG_EPSILON,
                        minmax: bool = True) -> np.ndarray:
    """log10 compression, then min-max to [0, 1] over the last two axes.

    A constant image maps to all zeros.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    out = np.log10(power + epsilon)
    if not minmax:
        return out
    lo = out.min(axis=(-2, -1), keepdims=True)
    span = out.max(axis=(-2, -1), keepdims=True) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (out - lo) / safe, 0.0)


def log_normalize(sg: Spectrogram, epsilon: float = LOG_EPSILON) -> Spectrogram:
    return Spectrogram(log_normalize_array(sg.power, epsilon), sg.df, sg.dt)


def scale_power(power: np.ndarray, mode: ScalingMode, epsilon: float = LOG_EPSILON) -> np.ndarray:
    if mode == "raw":
        return power
    if mode == "log":
        return log_normalize_array(power, epsilon, minmax=False)
    if mode == "log+minmax":
        return log_normalize_array(power, epsilon, minmax=True)
    raise ValueError(f"unknown scaling mode {mode!r}; expected one of {SCALING_MODES}")
