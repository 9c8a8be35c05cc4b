"""Confusion-matrix metrics and per-subject majority voting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VOTE_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts with class 1 (patient / high rating) as positive.

    Derived rates are computed on access. Undefined ratios are ``None``,
    never 0.
    """

    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        t = np.asarray(y_true, dtype=int)
        p = np.asarray(y_pred, dtype=int)
        return cls(int(np.sum((t == 1) & (p == 1))), int(np.sum((t == 1) & (p == 0))),
                   int(np.sum((t == 0) & (p == 1))), int(np.sum((t == 0) & (p == 0))))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fn + other.fn, self.fp + other.fp, self.tn + other.tn)

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> float | None:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def f1(self) -> float | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)


def metrics(cm: ConfusionMatrix) -> dict:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return {"accuracy": cm.accuracy, "f1": cm.f1, "precision": cm.precision, "recall": cm.recall}


def subject_vote(predictions, threshold: float = VOTE_THRESHOLD) -> int:
    """1 (patient) when the share of windows predicted 1 reaches ``threshold``."""
    p = np.asarray(predictions, dtype=int)
    if p.size == 0:
        raise ValueError("subject has no predicted samples")
    return int(np.sum(p == 1) / p.size >= threshold)
