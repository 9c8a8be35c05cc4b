"""Slow, independent reference computations used to cross-check fast code.

Each oracle is written from the defining formula with plain loops or a
different algorithm than the production path, so agreement is evidence.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def leaf_energy_fractions(freq_hz: float, rate_hz: float, lowpass, level: int = 4) -> np.ndarray:
    """Share of a pure tone's energy in each natural-order packet leaf.

    Every leaf is a cascade of filter-and-decimate stages; its response to
    ``cos(w n)`` is the product of the branch filters' frequency responses
    at ``w, 2w, 4w, ...``. For a tone with a whole number of cycles in the
    window the leaf keeps ``|response|**2 / 2**level`` of the energy.
    """
    h = np.asarray(lowpass, dtype=float)
    k = np.arange(len(h))
    g = (-1.0) ** k * h[::-1]
    w = 2 * np.pi * freq_hz / rate_hz
    out = np.empty(2**level)
    for leaf in range(2**level):
        resp = 1.0 + 0j
        for stage in range(level):
            bit = (leaf >> (level - 1 - stage)) & 1
            taps = g if bit else h
            resp *= np.sum(taps * np.exp(1j * w * 2**stage * k))
        out[leaf] = abs(resp) ** 2 / 2**level
    return out


def fft_band_energy(signal, rate_hz: float, lo_hz: float, hi_hz: float) -> float:
    """Fraction of signal energy in [lo, hi) Hz by Parseval on the real FFT."""
    x = np.asarray(signal, dtype=float)
    spec = np.abs(np.fft.rfft(x)) ** 2
    spec[1:len(x) // 2 + (len(x) % 2)] *= 2  # fold in negative frequencies
    freqs = np.fft.rfftfreq(len(x), 1.0 / rate_hz)
    return float(spec[(freqs >= lo_hz) & (freqs < hi_hz)].sum() / spec.sum())


def knn_bruteforce(train_X, train_y, query, k: int) -> int:
    """Sort all (distance, index) pairs, take the first ``k``, majority vote."""
    X = np.asarray(train_X, dtype=float).reshape(len(train_X), -1)
    q = np.asarray(query, dtype=float).ravel()
    pairs = sorted((float(np.sum((X[i] - q) ** 2)), i) for i in range(len(X)))
    votes: dict[int, int] = {}
    for _, i in pairs[:k]:
        votes[int(train_y[i])] = votes.get(int(train_y[i]), 0) + 1
    best = max(votes.values())
    return min(c for c, v in votes.items() if v == best)


def wilcoxon_enumeration(a, b) -> float:
    """One-sided P(W+ >= observed) by listing all 2**n sign patterns."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise ValueError("no nonzero pairs")
    absd = np.abs(d)
    ranks = np.array([np.sum(absd < v) + (np.sum(absd == v) + 1) / 2 for v in absd])
    observed = ranks[d > 0].sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        if np.dot(signs, ranks) >= observed - 1e-9:
            hits += 1
    return hits / 2**n


def idw_pixel(values, pixels, row: int, col: int, d_max: float, power: float = 1.0,
              border: str = "nearest") -> float:
    """One grid pixel of inverse-distance weighting, computed directly."""
    best_d, best_v = math.inf, 0.0
    num = den = 0.0
    for v, (r, c) in zip(values, pixels):
        d = math.hypot(row - r, col - c)
        if d == 0:
            return float(v)
        if d < best_d:
            best_d, best_v = d, float(v)
        if d <= d_max:
            num += v / d**power
            den += 1.0 / d**power
    if den > 0:
        return num / den
    return best_v if border == "nearest" else 0.0


def idw_grid(values, pixels, grid_size: int, d_max: float, power: float = 1.0,
             border: str = "nearest") -> np.ndarray:
    return np.array([[idw_pixel(values, pixels, r, c, d_max, power, border) for c in range(grid_size)]
                     for r in range(grid_size)])


def relative_energy_entropy(energies) -> tuple[list[float], list[float]]:
    """q_j = E_j / sum E and w_j = -q_j ln q_j (0 ln 0 = 0), element by element."""
    total = float(sum(energies))
    q = [e / total for e in energies]
    w = [0.0 if v == 0 else -v * math.log(v) for v in q]
    return q, w
