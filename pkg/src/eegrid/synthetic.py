"""Synthetic EEG with a planted, spatially localized class signal.

Every channel carries band-limited background activity. Each band's
amplitude on each channel has a fixed per-subject level and a slow random
drift, so the background differs between subjects and wanders within a
recording. Class-1 subjects get extra alpha-band activity from one source
seen by a cluster of adjacent electrodes; everywhere else there is only
background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recording import LabelSet, Montage, RawRecording, Task, default_montage

BACKGROUND_BANDS_HZ = ((0.5, 4.0), (4.0, 8.0), (8.0, 12.0), (12.0, 32.0), (32.0, 48.0))
ALPHA_HZ = (8.0, 12.0)
DRIFT_HZ = 0.2  # upper frequency of the amplitude drift


@dataclass(frozen=True)
class SyntheticSpec:
    n_subjects: int = 64
    duration_seconds: float = 60.0
    sample_rate_hz: float = 128.0
    cluster: tuple[str, ...] = ("T7", "CP5", "P7")
    alpha_gain: float = 8.0        # class-1 source RMS relative to a unit background band
    subject_spread: float = 0.5    # sigma of log band amplitude between subjects
    drift_spread: float = 0.4      # sigma of log band amplitude drift within a recording
    white_noise: float = 0.1
    seed: int = 0


def band_noise(rng: np.random.Generator, shape, rate_hz: float, lo: float, hi: float) -> np.ndarray:
    """Unit-RMS Gaussian noise confined to [lo, hi) Hz via an FFT mask."""
    n = shape[-1]
    spec = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    freqs = np.fft.rfftfreq(n, 1.0 / rate_hz)
    spec[..., (freqs < lo) | (freqs >= hi)] = 0.0
    x = np.fft.irfft(spec, n=n, axis=-1)
    rms = np.sqrt(np.mean(x**2, axis=-1, keepdims=True))
    return x / np.where(rms > 0, rms, 1.0)


def synthetic_subject(rng: np.random.Generator, label: int, n_channels: int, n_samples: int,
                      cluster_idx, spec: SyntheticSpec) -> np.ndarray:
    fs = spec.sample_rate_hz
    data = np.zeros((n_channels, n_samples))
    for lo, hi in BACKGROUND_BANDS_HZ:
        level = spec.subject_spread * rng.standard_normal((n_channels, 1))
        drift = spec.drift_spread * band_noise(rng, (n_channels, n_samples), fs, 0.0, DRIFT_HZ)
        data += np.exp(level + drift) * band_noise(rng, (n_channels, n_samples), fs, lo, hi)
    data += spec.white_noise * rng.standard_normal((n_channels, n_samples))
    if label == 1:
        source = band_noise(rng, (n_samples,), fs, *ALPHA_HZ)
        weights = rng.uniform(0.8, 1.2, size=len(cluster_idx))
        data[cluster_idx] += spec.alpha_gain * weights[:, None] * source
    return data


def synthetic_dataset(spec: SyntheticSpec = SyntheticSpec(), montage: Montage | None = None
                      ) -> tuple[list[RawRecording], LabelSet, Montage]:
    """``n_subjects`` single-trial recordings, alternating class 0 and 1, plus labels and montage."""
    montage = montage or default_montage(34)
    channels = tuple(montage.names)
    missing = [c for c in spec.cluster if c not in channels]
    if missing:
        raise ValueError(f"cluster electrodes not in montage: {missing}")
    if spec.n_subjects < 2:
        raise ValueError("need at least 2 subjects")
    cluster_idx = [channels.index(c) for c in spec.cluster]
    n = int(round(spec.duration_seconds * spec.sample_rate_hz))
    rng = np.random.default_rng(spec.seed)
    recordings, labels = [], {}
    for s in range(spec.n_subjects):
        sid = f"S{s:03d}"
        label = s % 2
        data = synthetic_subject(rng, label, len(channels), n, cluster_idx, spec)
        recordings.append(RawRecording(sid, "rest", spec.sample_rate_hz, channels, data))
        labels[(sid, "rest")] = float(label)
    return recordings, LabelSet(Task.SAD, labels, "label"), montage
