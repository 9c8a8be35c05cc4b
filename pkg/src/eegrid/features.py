"""Band energy and wavelet-entropy features, and model-1 feature matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preprocess import WindowSegment
from .wavelet import BandSpec, QmfPair, band_extract, make_db4, wpd_decompose

WPD_LEVEL = 4


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """One window as an (M, B) matrix: rows follow ``channels``, columns ``feature_layout``."""

    data: np.ndarray
    feature_layout: tuple[str, ...]
    channels: tuple[str, ...]
    subject_id: str = ""
    trial_id: str = ""
    window_index: int = 0
    label: int | None = None

    def __post_init__(self):
        if self.data.shape != (len(self.channels), len(self.feature_layout)):
            raise ValueError(
                f"data shape {self.data.shape} does not match "
                f"{len(self.channels)} channels x {len(self.feature_layout)} features"
            )

    def replace_data(self, data: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(data, self.feature_layout, self.channels, self.subject_id,
                             self.trial_id, self.window_index, self.label)


def mean_band_energy(coeffs) -> float:
    """Mean squared coefficient magnitude of one band."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.size == 0:
        raise ValueError("mean energy of an empty coefficient vector")
    return float(np.mean(np.abs(c) ** 2))


def relative_energies(band_energies) -> np.ndarray:
    """Each band's share of the total energy, along the last axis."""
    e = np.asarray(band_energies, dtype=np.float64)
    if e.size == 0:
        raise ValueError("no band energies")
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise ValueError("band energies must be finite and non-negative")
    total = e.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise ValueError("degenerate window: all band energies are zero")
    return e / total


def wavelet_entropy(q) -> np.ndarray:
    """Per-band entropy term ``-q ln q`` with ``0 ln 0 = 0``."""
    q = np.asarray(q, dtype=np.float64)
    if np.any(q < 0) or np.any(q > 1) or not np.all(np.isfinite(q)):
        raise ValueError("relative energies must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -q * np.log(q)
    return np.where(q > 0, w, 0.0)


def feature_layout(bands, include_entropy: bool) -> tuple[str, ...]:
    names = [f"{b.band.value}:energy" for b in bands]
    if include_entropy:
        names += [f"{b.band.value}:entropy" for b in bands]
    return tuple(names)


def band_features(signals: np.ndarray, bands, include_entropy: bool,
                  qmf: QmfPair | None = None) -> np.ndarray:
    """Feature block for a stack of signals (..., L) -> (..., B)."""
    leaves = wpd_decompose(signals, WPD_LEVEL, qmf or make_db4())
    energies = np.stack([np.mean(band_extract(leaves, b) ** 2, axis=-1) for b in bands], axis=-1)
    if not include_entropy:
        return energies
    return np.concatenate([energies, wavelet_entropy(relative_energies(energies))], axis=-1)


def model1_matrix(window: WindowSegment, bands: list[BandSpec] | tuple[BandSpec, ...],
                  include_entropy: bool, qmf: QmfPair | None = None) -> FeatureMatrix:
    """Rows = channels, columns = band mean energies then (optionally) band entropies."""
    if window.length % 2**WPD_LEVEL:
        raise ValueError(f"window length {window.length} is not divisible by {2**WPD_LEVEL}")
    data = band_features(window.data, bands, include_entropy, qmf)
    channels = window.channels or tuple(str(i) for i in range(data.shape[0]))
    return FeatureMatrix(data, feature_layout(bands, include_entropy), tuple(channels),
                         window.subject_id, window.trial_id, window.window_index, window.label)
