"""Wavelet packet decomposition with an orthonormal Daubechies filter pair.

Filtering uses periodic extension, so every analysis step is an orthogonal
transform and leaf energies sum exactly to the signal energy.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import comb, sqrt

import numpy as np


@dataclass(frozen=True, eq=False)
class QmfPair:
    lowpass: np.ndarray
    highpass: np.ndarray

    def __post_init__(self):
        if self.lowpass.shape != self.highpass.shape or self.lowpass.ndim != 1:
            raise ValueError("lowpass and highpass must be 1-D arrays of equal length")
        if len(self.lowpass) % 2:
            raise ValueError("filter length must be even")

    @property
    def length(self) -> int:
        return len(self.lowpass)


def quadrature_mirror(lowpass: np.ndarray) -> np.ndarray:
    """``g[k] = (-1)**k * h[n-1-k]``."""
    n = len(lowpass)
    signs = (-1.0) ** np.arange(n)
    return signs * lowpass[::-1]


def daubechies_lowpass(vanishing_moments: int) -> np.ndarray:
    """Minimum-phase Daubechies scaling filter with ``2 * vanishing_moments`` taps.

    Spectral factorization: the half-band polynomial
    ``P(y) = sum_k C(N-1+k, k) y**k`` with ``y = sin^2(w/2)`` is rewritten in
    ``z`` and the roots inside the unit circle form the minimum-phase factor.
    """
    n = vanishing_moments
    if n < 1:
        raise ValueError("need at least one vanishing moment")
    # y = -(z - 1)**2 / (4 z); multiply through by z**(n-1) to get a polynomial in z.
    minus_y_z = np.array([-0.25, 0.5, -0.25])  # -(z-1)^2/4, highest power first
    poly = np.zeros(2 * n - 1)
    for k in range(n):
        term = np.array([1.0])
        for _ in range(k):
            term = np.convolve(term, minus_y_z)
        term = comb(n - 1 + k, k) * np.concatenate([term, np.zeros(n - 1 - k)])
        poly[len(poly) - len(term):] += term
    roots = np.roots(poly) if len(poly) > 1 else np.array([])
    inside = roots[np.abs(roots) < 1.0]
    q = np.real(np.poly(inside))
    binom = np.array([comb(n, i) for i in range(n + 1)], dtype=float)
    h = np.convolve(binom, q)
    h = h * (sqrt(2.0) / h.sum())
    # np.poly lists the highest power first; the front-loaded (minimum-phase) order
    # puts the large taps first.
    h = h[::-1]
    if np.sum(h[: len(h) // 2] ** 2) < np.sum(h[len(h) // 2:] ** 2):
        h = h[::-1]
    return h


@lru_cache(maxsize=None)
def _db(vanishing_moments: int) -> tuple[float, ...]:
    return tuple(daubechies_lowpass(vanishing_moments))


def make_db4() -> QmfPair:
    """The 8-tap db4 analysis pair."""
    h = np.array(_db(4))
    h.setflags(write=False)
    g = quadrature_mirror(h)
    g.setflags(write=False)
    return QmfPair(h, g)


@lru_cache(maxsize=64)
def _periodic_index(length: int, taps: int) -> np.ndarray:
    n = np.arange(length // 2)
    return (2 * n[:, None] + np.arange(taps)[None, :]) % length


def analysis_step(signal: np.ndarray, qmf: QmfPair | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One filter-bank split of the last axis: ``(approx, detail)``, each half length.

    ``approx[n] = sum_k h[k] x[(2n + k) mod L]`` and likewise for the detail
    branch with the highpass filter.
    """
    qmf = qmf or make_db4()
    x = np.asarray(signal, dtype=np.float64)
    length = x.shape[-1]
    if length < 2 or length % 2:
        raise ValueError(f"analysis step needs an even length >= 2, got {length}")
    patches = x[..., _periodic_index(length, qmf.length)]
    return patches @ qmf.lowpass, patches @ qmf.highpass


@dataclass(frozen=True, eq=False)
class WpdLeaves:
    """Leaves of a full packet tree, ``data`` shaped (..., 2**level, leaf_length) in natural order."""

    level: int
    data: np.ndarray

    @property
    def n_leaves(self) -> int:
        return self.data.shape[-2]

    @property
    def leaf_length(self) -> int:
        return self.data.shape[-1]

    def leaf(self, natural_index: int) -> np.ndarray:
        return self.data[..., natural_index, :]

    def frequency_ordered(self) -> np.ndarray:
        return self.data[..., frequency_order(self.level), :]


def wpd_decompose(signal: np.ndarray, level: int = 4, qmf: QmfPair | None = None) -> WpdLeaves:
    """Split both branches recursively down to ``level`` along the last axis."""
    qmf = qmf or make_db4()
    x = np.asarray(signal, dtype=np.float64)
    if level < 1:
        raise ValueError("level must be >= 1")
    if x.shape[-1] % (2**level):
        raise ValueError(f"signal length {x.shape[-1]} is not divisible by 2**{level}")
    nodes = x[..., None, :]
    for _ in range(level):
        a, d = analysis_step(nodes, qmf)
        nodes = np.stack([a, d], axis=-2).reshape(*nodes.shape[:-2], 2 * nodes.shape[-2], -1)
    return WpdLeaves(level, nodes)


def frequency_order(level: int) -> np.ndarray:
    """``perm[f]`` is the natural-order leaf covering the f-th frequency bin.

    Decimating a highpass branch mirrors its spectrum, which scrambles the
    natural order into the binary-reflected Gray code.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    f = np.arange(2**level)
    return f ^ (f >> 1)


def natural_to_frequency(level: int) -> np.ndarray:
    """Inverse permutation of :func:`frequency_order`."""
    return np.argsort(frequency_order(level))


class Band(str, Enum):
    DELTA = "Delta"
    THETA = "Theta"
    ALPHA = "Alpha"
    BETA = "Beta"
    GAMMA = "Gamma"


BAND_RANGES_HZ = {
    Band.DELTA: (0.0, 4.0),
    Band.THETA: (4.0, 8.0),
    Band.ALPHA: (8.0, 12.0),
    Band.BETA: (12.0, 32.0),
    Band.GAMMA: (32.0, 48.0),
}


@dataclass(frozen=True)
class BandSpec:
    band: Band
    hz_range: tuple[float, float]
    leaf_indices: tuple[int, ...]  # frequency-ordered, ascending


def band_spec(band: Band | str, sample_rate_hz: float = 128.0, level: int = 4,
              hz_range: tuple[float, float] | None = None) -> BandSpec:
    """Frequency-ordered leaves whose bins tile ``hz_range`` exactly."""
    band = Band(band)
    lo, hi = hz_range or BAND_RANGES_HZ[band]
    width = sample_rate_hz / 2 / 2**level
    first, last = lo / width, hi / width
    if abs(first - round(first)) > 1e-9 or abs(last - round(last)) > 1e-9:
        raise ValueError(f"{band.value} edges {lo}-{hi} Hz are not multiples of the {width:g} Hz bin width")
    first, last = int(round(first)), int(round(last))
    if not (0 <= first < last <= 2**level):
        raise ValueError(f"{band.value} range {lo}-{hi} Hz outside 0-{sample_rate_hz / 2:g} Hz")
    return BandSpec(band, (lo, hi), tuple(range(first, last)))


SAD_BANDS = tuple(band_spec(b) for b in (Band.DELTA, Band.THETA, Band.ALPHA, Band.BETA, Band.GAMMA))
DEAP_BANDS = tuple(b for b in SAD_BANDS if b.band is not Band.DELTA)


def bands_for_task(task: str) -> tuple[BandSpec, ...]:
    return SAD_BANDS if task == "SAD" else DEAP_BANDS


def band_extract(leaves: WpdLeaves, spec: BandSpec) -> np.ndarray:
    """Concatenate the band's leaves in ascending frequency along the last axis."""
    n = leaves.n_leaves
    bad = [i for i in spec.leaf_indices if not 0 <= i < n]
    if bad:
        raise IndexError(f"leaf index {bad[0]} out of range for {n} leaves")
    natural = frequency_order(leaves.level)[list(spec.leaf_indices)]
    picked = leaves.data[..., natural, :]
    return picked.reshape(*picked.shape[:-2], -1)
