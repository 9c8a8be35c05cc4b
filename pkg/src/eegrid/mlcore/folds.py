"""Stratified, leakage-safe k-fold plans over subjects or (subject, video) units."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np


class FoldMode(str, Enum):
    INDEPENDENT = "independent"  # unit = subject
    DEPENDENT = "dependent"      # unit = (subject, video)


class LeakageError(RuntimeError):
    """A unit appears in more than one of train / validation / test."""


@dataclass(frozen=True)
class Split:
    test_fold: int
    valid_fold: int
    train_units: frozenset
    valid_units: frozenset
    test_units: frozenset


@dataclass(frozen=True)
class FoldPlan:
    k: int
    mode: FoldMode
    assignment: dict
    seed: int

    def fold_units(self, fold: int) -> frozenset:
        return frozenset(u for u, f in self.assignment.items() if f == fold)

    def fold_sizes(self) -> list[int]:
        counts = Counter(self.assignment.values())
        return [counts.get(f, 0) for f in range(self.k)]

    def split(self, test_fold: int) -> Split:
        """Test on ``test_fold``, validate on the next fold, train on the rest."""
        valid_fold = (test_fold + 1) % self.k
        test = self.fold_units(test_fold)
        valid = self.fold_units(valid_fold)
        train = frozenset(u for u, f in self.assignment.items() if f not in (test_fold, valid_fold))
        s = Split(test_fold, valid_fold, train, valid, test)
        check_no_leakage(s.train_units, s.valid_units, s.test_units)
        return s

    def splits(self) -> list[Split]:
        return [self.split(f) for f in range(self.k)]

    def canonical(self) -> list:
        """Order-independent description, used to compare plans across experiment arms."""
        return sorted((repr(u), f) for u, f in self.assignment.items())


def _sort_key(unit):
    return (0, unit) if isinstance(unit, str) else (1, tuple(str(p) for p in unit))


def make_folds(units, labels, k: int = 8, mode: FoldMode | str = FoldMode.INDEPENDENT,
               seed: int = 0) -> FoldPlan:
    """Deal units into ``k`` folds, class by class, after a seeded shuffle.

    Fold sizes differ by at most one unit and so does each class's count per
    fold. The plan depends only on the set of (unit, label) pairs and the seed,
    not on input order.
    """
    mode = FoldMode(mode)
    units = list(units)
    labels = [int(v) for v in labels]
    if len(units) != len(labels):
        raise ValueError("units and labels differ in length")
    if len(set(units)) != len(units):
        raise ValueError("units must be unique")
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > len(units):
        raise ValueError(f"{k} folds requested for only {len(units)} units")
    if mode is FoldMode.DEPENDENT and not all(isinstance(u, tuple) and len(u) == 2 for u in units):
        raise ValueError("subject-dependent folds need (subject, video) units")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("both classes must be present to stratify")

    rng = np.random.default_rng(seed)
    by_label = {c: sorted((u for u, y in zip(units, labels) if y == c), key=_sort_key) for c in classes}
    dealt = []
    for c in classes:
        members = by_label[c]
        dealt.extend(members[i] for i in rng.permutation(len(members)))
    assignment = {u: i % k for i, u in enumerate(dealt)}
    return FoldPlan(k, mode, assignment, seed)


def unit_labels(sample_units, sample_labels) -> tuple[list, list[int]]:
    """Collapse per-sample labels to one label per unit (majority, ties -> 1)."""
    votes: dict = {}
    for u, y in zip(sample_units, sample_labels):
        votes.setdefault(u, []).append(int(y))
    units = sorted(votes, key=_sort_key)
    return units, [int(np.mean(votes[u]) >= 0.5) for u in units]


def check_no_leakage(train_units, valid_units, test_units) -> None:
    train, valid, test = set(train_units), set(valid_units), set(test_units)
    for name, overlap in (("train/validation", train & valid), ("train/test", train & test),
                          ("validation/test", valid & test)):
        if overlap:
            raise LeakageError(f"{name} share units: {sorted(map(repr, overlap))[:5]}")
