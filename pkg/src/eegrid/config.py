"""Experiment configuration: defaults, validation, JSON files and hashing.

The configuration is flat so that every key maps one-to-one onto a command
line flag of the same name.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .topomap import ALLOWED_GRID_SIZES, InterpMethod

DATA_DIR_ENV = "EEGRID_DATA_DIR"
TASKS = ("SAD", "Valence", "Arousal")
CLASSIFIERS = ("knn3", "knn5", "svm", "cnn")
# keys that never change results and so stay out of the hash
RUNTIME_KEYS = ("jobs", "output_dir")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


class ConfigError(ValueError):
    """Inconsistent or unknown configuration values."""


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "SAD"
    model: int = 2
    features: str = "energy_entropy"
    window_seconds: float | None = None    # SAD 5, DEAP 4
    shift_seconds: float | None = None     # SAD = window, DEAP = window / 2
    baseline_trim_seconds: float | None = None  # SAD 0, DEAP 3
    target_rate_hz: float = 128.0
    grid_size: int = 15
    interp_method: str = "idw_nearest_border"
    d_max: float = 3.0
    idw_power: float = 1.0
    augment: str = "none"                  # none | default | extended
    classifier: str = "knn3"
    folds: int = 8
    mode: str = "independent"
    seed: int = 0
    label_threshold: float = 5.0
    # data
    source: str = "files"                  # files | synthetic
    data_dir: str = ""                     # defaults to $EEGRID_DATA_DIR
    recordings: str = "recordings"
    labels: str = "labels.csv"
    montage: str = ""                      # empty: shipped montage matching the channel count
    output_dir: str = "eegrid_out"
    jobs: int = 1
    # synthetic source
    synthetic_subjects: int = 64
    synthetic_seconds: float = 60.0
    synthetic_gain: float = 8.0
    # svm
    svm_C: tuple[float, ...] = (0.1, 1.0, 10.0)
    svm_sigma: tuple[float, ...] = (0.2, 0.4, 0.8)
    svm_tol: float = 1e-3
    # cnn
    cnn_padding: str = "auto"              # auto: valid when it fits, else same
    cnn_epochs: int = 50
    cnn_patience: int = 5
    cnn_batch: int = 32
    cnn_lr: float = 1e-3
    cnn_optimizer: str = "adam"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                object.__setattr__(self, f.name, tuple(v))
        deap = self.task in ("Valence", "Arousal")
        if self.window_seconds is None:
            object.__setattr__(self, "window_seconds", 4.0 if deap else 5.0)
        if self.shift_seconds is None:
            object.__setattr__(self, "shift_seconds", self.window_seconds / 2 if deap else self.window_seconds)
        if self.baseline_trim_seconds is None:
            object.__setattr__(self, "baseline_trim_seconds", 3.0 if deap else 0.0)
        if not self.data_dir:
            object.__setattr__(self, "data_dir", os.environ.get(DATA_DIR_ENV, "."))
        self.validate()

    def validate(self) -> None:
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        need(self.task in TASKS, f"task must be one of {TASKS}")
        need(self.model in (1, 2), "model must be 1 or 2")
        need(self.features in ("energy", "energy_entropy"), "features must be 'energy' or 'energy_entropy'")
        need(self.window_seconds > 0 and self.shift_seconds > 0, "window and shift must be positive")
        need(self.baseline_trim_seconds >= 0, "baseline trim must be non-negative")
        need(self.target_rate_hz > 0, "target rate must be positive")
        need(self.grid_size in ALLOWED_GRID_SIZES, f"grid_size must be one of {ALLOWED_GRID_SIZES}")
        need(self.interp_method in {m.value for m in InterpMethod}, f"unknown interp_method {self.interp_method!r}")
        need(self.d_max > 0 and self.idw_power > 0, "d_max and idw_power must be positive")
        need(self.augment in ("none", "default", "extended"), "augment must be none, default or extended")
        need(self.classifier in CLASSIFIERS, f"classifier must be one of {CLASSIFIERS}")
        need(self.folds >= 2, "need at least 2 folds")
        need(self.mode in ("independent", "dependent"), "mode must be independent or dependent")
        need(self.source in ("files", "synthetic"), "source must be files or synthetic")
        need(self.jobs >= 1, "jobs must be >= 1")
        need(self.synthetic_subjects >= 2 and self.synthetic_seconds > 0, "bad synthetic dataset size")
        need(len(self.svm_C) > 0 and len(self.svm_sigma) > 0, "svm grids must be non-empty")
        need(self.cnn_padding in ("auto", "valid", "same"), "cnn_padding must be auto, valid or same")
        need(self.cnn_optimizer in ("adam", "sgd"), "cnn_optimizer must be adam or sgd")
        need(0 < self.cnn_patience < self.cnn_epochs, "cnn_patience must be below cnn_epochs")
        need(self.source != "synthetic" or self.task == "SAD", "the synthetic source produces SAD-style data")
        need(self.mode == "independent" or self.task != "SAD",
             "SAD has one recording per subject; use independent mode")

    # -- derived -----------------------------------------------------------

    @property
    def include_entropy(self) -> bool:
        return self.features == "energy_entropy"

    @property
    def subject_voting(self) -> bool:
        return self.task == "SAD"

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.data_dir) / p

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v) for f in fields(self)}

    def canonical_text(self, keys=None) -> str:
        d = self.to_dict()
        keys = [k for k in d if k not in RUNTIME_KEYS] if keys is None else keys
        return json.dumps({k: d[k] for k in keys}, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return f"{fnv1a_64(self.canonical_text().encode()):016x}"

    def extraction_hash(self) -> str:
        """Hash of the keys that determine the extracted samples."""
        keys = ["task", "model", "features", "window_seconds", "shift_seconds", "baseline_trim_seconds",
                "target_rate_hz", "label_threshold", "source", "data_dir", "recordings", "labels", "montage"]
        if self.model == 2:
            keys += ["grid_size", "interp_method", "d_max", "idw_power"]
        if self.source == "synthetic":
            keys += ["seed", "synthetic_subjects", "synthetic_seconds", "synthetic_gain"]
        return f"{fnv1a_64(self.canonical_text(keys).encode()):016x}"

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def config_fields():
    """(name, type annotation, default) for every config key."""
    return [(f.name, f.type, f.default if f.default is not dataclasses.MISSING else None)
            for f in fields(ExperimentConfig)]
