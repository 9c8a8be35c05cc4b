"""Label-preserving shift augmentation of training samples.

Shifting moves content by ``(dy, dx)`` while keeping the array size; the rows
or columns uncovered at the edge repeat the nearest surviving one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix
from .samples import SampleSet
from .topomap import FeatureGrid

MAX_SHIFT = 2

DEFAULT_SHIFTS = ((0, 0), (0, 1), (0, -1), (1, 0), (-1, 0))
EXTENDED_SHIFTS = DEFAULT_SHIFTS + ((0, 2), (0, -2), (2, 0), (-2, 0))


@dataclass(frozen=True)
class AugmentPlan:
    shifts: tuple[tuple[int, int], ...] = DEFAULT_SHIFTS
    apply_to: int = 2  # model number

    def __post_init__(self):
        shifts = tuple((int(dy), int(dx)) for dy, dx in self.shifts)
        object.__setattr__(self, "shifts", shifts)
        if (0, 0) not in shifts:
            raise ValueError("augmentation plan must keep the original sample (0, 0)")
        if len(set(shifts)) != len(shifts):
            raise ValueError("duplicate shifts in plan")
        if any(abs(dy) > MAX_SHIFT or abs(dx) > MAX_SHIFT for dy, dx in shifts):
            raise ValueError(f"shifts are limited to +-{MAX_SHIFT} pixels")
        if self.apply_to not in (1, 2):
            raise ValueError("apply_to must be model 1 or 2")

    @classmethod
    def named(cls, name: str, model: int) -> "AugmentPlan | None":
        if name == "none":
            return None
        if name == "default":
            return cls(DEFAULT_SHIFTS, model)
        if name == "extended":
            return cls(EXTENDED_SHIFTS, model)
        raise ValueError(f"unknown augmentation plan {name!r}")


def shift_edge(x: np.ndarray, shift: int, axis: int) -> np.ndarray:
    """``out[i] = x[clip(i - shift)]`` along ``axis``."""
    n = x.shape[axis]
    if abs(shift) >= n:
        raise ValueError(f"shift {shift} too large for axis of length {n}")
    if shift == 0:
        return x
    idx = np.clip(np.arange(n) - shift, 0, n - 1)
    return np.take(x, idx, axis=axis)


def shift_model1(m: FeatureMatrix, dy: int, dx: int = 0) -> FeatureMatrix:
    """Shift channel rows by ``dy`` (and feature columns by ``dx``), replicating edges."""
    rows, cols = m.data.shape
    if abs(dy) >= rows or abs(dx) >= cols:
        raise ValueError(f"shift ({dy}, {dx}) out of range for a {rows}x{cols} matrix")
    data = shift_edge(shift_edge(m.data, dy, 0), dx, 1)
    return m.replace_data(data)


def shift_model2(g: FeatureGrid, dy: int, dx: int) -> FeatureGrid:
    """Shift every band slice of a grid by the same (dy, dx); the band axis is untouched."""
    if abs(dy) > MAX_SHIFT or abs(dx) > MAX_SHIFT:
        raise ValueError(f"shift ({dy}, {dx}) exceeds +-{MAX_SHIFT}")
    data = shift_edge(shift_edge(g.data, dy, 0), dx, 1)
    return g.replace_data(data)


def _check_model(model: int, plan: AugmentPlan) -> None:
    if model != plan.apply_to:
        raise ValueError(f"plan targets model {plan.apply_to} but samples are model {model}")


def expand_training_set(samples, plan: AugmentPlan):
    """Every sample under every shift of the plan (originals included).

    Accepts a list of FeatureMatrix / FeatureGrid or a SampleSet and returns
    the same kind. Output order is sample-major, shift-minor.
    """
    if isinstance(samples, SampleSet):
        _check_model(samples.model, plan)
        if len(samples) == 0:
            return samples
        # axis 0 indexes samples; 1 and 2 are rows and columns of each sample
        shifted = [shift_edge(shift_edge(samples.X, dy, 1), dx, 2) for dy, dx in plan.shifts]
        n, s = len(samples), len(plan.shifts)
        X = np.stack(shifted, axis=1).reshape(n * s, *samples.X.shape[1:])
        rep = np.repeat(np.arange(n), s)
        base = samples.subset(rep)
        return SampleSet(X, base.labels, base.subjects, base.trials, base.windows,
                         samples.feature_layout, samples.model, samples.channels)

    out = []
    for s in samples:
        model = 1 if isinstance(s, FeatureMatrix) else 2
        _check_model(model, plan)
        for dy, dx in plan.shifts:
            out.append(shift_model1(s, dy, dx) if model == 1 else shift_model2(s, dy, dx))
    return out
