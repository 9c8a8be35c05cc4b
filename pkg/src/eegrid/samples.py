"""Batched sample sets (model-1 matrices or model-2 grids) with provenance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix
from .recording import read_container, write_container, FormatError
from .topomap import FeatureGrid


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``X`` is (n, M, B) for model 1 or (n, K, K, B) for model 2."""

    X: np.ndarray
    labels: np.ndarray
    subjects: tuple[str, ...]
    trials: tuple[str, ...]
    windows: np.ndarray
    feature_layout: tuple[str, ...]
    model: int
    channels: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.X)
        if not (len(self.labels) == len(self.subjects) == len(self.trials) == len(self.windows) == n):
            raise ValueError("sample arrays disagree in length")
        if self.model not in (1, 2):
            raise ValueError("model must be 1 or 2")
        expected_ndim = 3 if self.model == 1 else 4
        if n and self.X.ndim != expected_ndim:
            raise ValueError(f"model {self.model} samples must be {expected_ndim}-D, got {self.X.ndim}-D")

    def __len__(self) -> int:
        return len(self.X)

    def units(self, mode: str) -> list:
        """Leakage unit of each sample: subject, or (subject, trial) in dependent mode."""
        if mode == "independent":
            return list(self.subjects)
        return list(zip(self.subjects, self.trials))

    def subset(self, index) -> "SampleSet":
        index = np.asarray(index, dtype=int)
        return SampleSet(
            self.X[index], self.labels[index],
            tuple(self.subjects[i] for i in index), tuple(self.trials[i] for i in index),
            self.windows[index], self.feature_layout, self.model, self.channels,
        )

    @classmethod
    def from_samples(cls, samples, channels=()) -> "SampleSet":
        samples = list(samples)
        if not samples:
            raise ValueError("no samples")
        model = 1 if isinstance(samples[0], FeatureMatrix) else 2
        if model == 1 and not channels:
            channels = samples[0].channels
        return cls(
            np.stack([s.data for s in samples]),
            np.array([s.label for s in samples], dtype=int),
            tuple(s.subject_id for s in samples), tuple(s.trial_id for s in samples),
            np.array([s.window_index for s in samples], dtype=int),
            samples[0].feature_layout, model, tuple(channels),
        )

    def to_samples(self) -> list:
        out = []
        for i in range(len(self)):
            if self.model == 1:
                out.append(FeatureMatrix(self.X[i], self.feature_layout, self.channels, self.subjects[i],
                                         self.trials[i], int(self.windows[i]), int(self.labels[i])))
            else:
                out.append(FeatureGrid(self.X[i], self.feature_layout, self.subjects[i], self.trials[i],
                                       int(self.windows[i]), int(self.labels[i])))
        return out

    def save(self, path, extra: dict | None = None) -> None:
        meta = {
            "kind": "samples",
            "model": self.model,
            "layout": list(self.feature_layout),
            "channels": list(self.channels),
            "labels": [int(v) for v in self.labels],
            "subjects": list(self.subjects),
            "trials": list(self.trials),
            "windows": [int(v) for v in self.windows],
        }
        if extra:
            meta["extra"] = extra
        write_container(path, meta, self.X)

    @classmethod
    def load(cls, path) -> tuple["SampleSet", dict]:
        meta, values = read_container(path)
        if meta.get("kind") != "samples":
            raise FormatError(f"container holds {meta.get('kind')!r}, not samples", path)
        ss = cls(
            values.astype(np.float64), np.array(meta["labels"], dtype=int),
            tuple(meta["subjects"]), tuple(meta["trials"]), np.array(meta["windows"], dtype=int),
            tuple(meta["layout"]), int(meta["model"]), tuple(meta["channels"]),
        )
        return ss, meta.get("extra", {})
