"""One-sided Wilcoxon signed-rank test for paired samples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

EXACT_MAX_N = 25


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences
    p_value: float
    n: int            # pairs left after dropping zero differences
    method: str       # "exact" or "normal"


def signed_ranks(d) -> np.ndarray:
    """Average ranks of ``|d|`` (ties share the mean rank)."""
    return stats.rankdata(np.abs(np.asarray(d, dtype=float)), method="average")


def exact_upper_tail(ranks, observed: float) -> float:
    """P(W+ >= observed) when every rank's sign is a fair coin.

    Ranks are doubled so tied half-ranks become integers, and the null
    distribution over all 2**n sign patterns is accumulated by convolution.
    """
    twice = np.rint(2 * np.asarray(ranks, dtype=float)).astype(int)
    counts = np.zeros(int(twice.sum()) + 1)
    counts[0] = 1.0
    for r in twice:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: len(counts) - r]
        counts = counts + shifted
    threshold = int(np.rint(2 * observed))
    return float(counts[threshold:].sum() / 2 ** len(twice))


def wilcoxon_test(a, b, exact_max_n: int = EXACT_MAX_N, min_pairs: int = 5) -> WilcoxonResult:
    """Test H1: ``a`` tends to exceed ``b`` (differences ``a - b`` are positive)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be paired 1-D samples")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise ValueError("no nonzero pairs")
    if n < min_pairs:
        raise ValueError(f"only {n} nonzero pairs; at least {min_pairs} required")
    ranks = signed_ranks(d)
    w_plus = float(ranks[d > 0].sum())
    if n <= exact_max_n:
        return WilcoxonResult(w_plus, exact_upper_tail(ranks, w_plus), n, "exact")
    mean = n * (n + 1) / 4
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(tie_counts**3 - tie_counts) / 48
    z = (w_plus - mean - 0.5) / np.sqrt(var)
    return WilcoxonResult(w_plus, float(stats.norm.sf(z)), n, "normal")


def wilcoxon_signed_rank(a, b, **kwargs) -> float:
    """One-sided p-value for ``a > b``; see :func:`wilcoxon_test`."""
    return wilcoxon_test(a, b, **kwargs).p_value
