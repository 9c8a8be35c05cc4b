"""Referencing, normalization, resampling and windowing of recordings."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .recording import RawRecording

# Shifts tried for window size N, expressed as fractions of N.
SHIFT_FRACTIONS = (0.25, 0.5, 1.0, 1.5)


@dataclass(frozen=True, eq=False)
class WindowSegment:
    subject_id: str
    trial_id: str
    window_index: int
    data: np.ndarray  # (M, L)
    label: int | None = None
    channels: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return self.data.shape[1]


def common_average_reference(rec: RawRecording) -> RawRecording:
    """Subtract the across-channel mean from every sample."""
    if rec.n_channels < 2:
        raise ValueError("common average reference needs at least 2 channels")
    data = rec.data - rec.data.mean(axis=0, keepdims=True)
    return rec.with_data(data)


def zscore_rows(data: np.ndarray) -> np.ndarray:
    """Per-row z-score; constant rows become zeros."""
    data = np.asarray(data, dtype=np.float64)
    mean = data.mean(axis=-1, keepdims=True)
    centered = data - mean
    std = np.sqrt(np.mean(centered**2, axis=-1, keepdims=True))
    # Relative test: a row whose spread is round-off of its offset is constant.
    scale = np.maximum(np.abs(mean), np.max(np.abs(data), axis=-1, keepdims=True))
    constant = std <= 1e-12 * np.maximum(scale, np.finfo(float).tiny)
    safe = np.where(constant, 1.0, std)
    return np.where(constant, 0.0, centered / safe)


def normalize_channel(rec: RawRecording) -> RawRecording:
    """Z-score each channel over the whole recording (population variance)."""
    return rec.with_data(zscore_rows(rec.data))


def decimate(rec: RawRecording, target_hz: float = 128.0) -> RawRecording:
    """Integer-factor downsampling behind a linear-phase FIR anti-alias filter."""
    ratio = rec.sample_rate_hz / target_hz
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise ValueError(f"cannot decimate {rec.sample_rate_hz} Hz to {target_hz} Hz by an integer factor")
    if factor == 1:
        return rec
    data = signal.decimate(rec.data, factor, ftype="fir", zero_phase=True, axis=1)
    return rec.with_data(data, sample_rate_hz=rec.sample_rate_hz / factor)


def window_starts(n_samples: int, rate_hz: float, window_seconds: float, shift_seconds: float,
                  baseline_trim_seconds: float = 0.0) -> tuple[list[int], int]:
    """Sample offsets of every complete window, and the window length in samples."""
    if window_seconds <= 0 or shift_seconds <= 0:
        raise ValueError("window and shift must be positive")
    if baseline_trim_seconds < 0:
        raise ValueError("baseline trim must be non-negative")
    length = int(round(window_seconds * rate_hz))
    if length < 2:
        raise ValueError(f"window of {window_seconds} s at {rate_hz} Hz is shorter than 2 samples")
    starts = []
    i = 0
    while True:
        start = int(round((baseline_trim_seconds + i * shift_seconds) * rate_hz))
        if start + length > n_samples:
            break
        starts.append(start)
        i += 1
    if not starts:
        raise ValueError(
            f"recording of {n_samples / rate_hz:g} s is shorter than trim {baseline_trim_seconds:g} s "
            f"plus one {window_seconds:g} s window"
        )
    return starts, length


def segment(rec: RawRecording, window_seconds: float, shift_seconds: float,
            baseline_trim_seconds: float = 0.0, label: int | None = None) -> list[WindowSegment]:
    """Cut ``rec`` into fixed-length windows starting at ``trim + i * shift``.

    Trailing partial windows are dropped.
    """
    starts, length = window_starts(rec.n_samples, rec.sample_rate_hz, window_seconds,
                                   shift_seconds, baseline_trim_seconds)
    out = []
    for i, s in enumerate(starts):
        win = np.array(rec.data[:, s:s + length])
        win.setflags(write=False)
        out.append(WindowSegment(rec.subject_id, rec.trial_id, i, win, label, rec.channels))
    return out


def prepare(rec: RawRecording, task: str, target_hz: float = 128.0) -> RawRecording:
    """Task-specific conditioning ahead of windowing.

    DEAP tasks (Valence, Arousal) get a common average reference then channel
    normalization; SAD recordings are only normalized because they arrive
    already referenced. Both are brought to ``target_hz`` first.
    """
    rec = decimate(rec, target_hz)
    if task in ("Valence", "Arousal"):
        rec = common_average_reference(rec)
    return normalize_channel(rec)
