"""Recording, montage and label I/O.

Two recording formats are supported:

``csv``
    Four header lines (``subject,<id>``, ``trial,<id>``, ``rate_hz,<float>``,
    ``channels,<name>,<name>,...``) followed by one comma-separated row of
    samples per channel, in header order.

``raw_f32``
    The binary container written by :func:`write_container`: a 16-byte header
    (``EEGRID01`` magic, uint32 version, uint32 metadata length), a UTF-8 JSON
    metadata block, a uint64 value count and the values as little-endian
    float32.
"""
from __future__ import annotations

import csv
import json
import math
import os
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

MAGIC = b"EEGRID01"
CONTAINER_VERSION = 1
_HEADER = struct.Struct("<8sII")
_COUNT = struct.Struct("<Q")

# Label-file trial wildcard: one label for every trial of a subject (SAD).
ANY_TRIAL = "*"


class FormatError(ValueError):
    """Raised for malformed input files. Carries file/line context in the message."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True, eq=False)
class RawRecording:
    """Multichannel signal of one subject/trial, ``data`` shaped (M, T) in microvolts."""

    subject_id: str
    trial_id: str
    sample_rate_hz: float
    channels: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"data must be 2-D (channels x samples), got shape {data.shape}")
        channels = tuple(self.channels)
        if len(channels) != data.shape[0]:
            raise ValueError(f"{len(channels)} channel names for {data.shape[0]} data rows")
        if len(set(channels)) != len(channels):
            raise ValueError("channel names must be unique")
        if data.shape[1] < 1:
            raise ValueError("recording has no samples")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(data)):
            raise ValueError("recording contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_seconds(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def with_data(self, data: np.ndarray, sample_rate_hz: float | None = None) -> "RawRecording":
        return RawRecording(
            self.subject_id,
            self.trial_id,
            self.sample_rate_hz if sample_rate_hz is None else sample_rate_hz,
            self.channels,
            data,
        )


@dataclass(frozen=True)
class Montage:
    """Electrode name -> (x, y) in normalized scalp coordinates, both in [0, 1].

    ``y`` grows from the front of the head (nasion) towards the back.
    """

    entries: dict[str, tuple[float, float]]

    def __post_init__(self):
        seen = {}
        for name, (x, y) in self.entries.items():
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"electrode {name!r} position ({x}, {y}) outside [0, 1]")
            if (x, y) in seen:
                raise ValueError(f"electrodes {seen[(x, y)]!r} and {name!r} share position ({x}, {y})")
            seen[(x, y)] = name

    @property
    def names(self) -> list[str]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def position(self, name: str) -> tuple[float, float]:
        return self.entries[name]

    def check_covers(self, channels) -> None:
        missing = [c for c in channels if c not in self.entries]
        if missing:
            raise ValueError(f"channels missing from montage: {', '.join(missing)}")

    def mirrored(self) -> "Montage":
        """Left/right mirror image (x -> 1 - x), names unchanged."""
        return Montage({n: (1.0 - x, y) for n, (x, y) in self.entries.items()})


class Task(str, Enum):
    SAD = "SAD"
    VALENCE = "Valence"
    AROUSAL = "Arousal"


@dataclass(frozen=True)
class LabelSet:
    """Per-(subject, trial) ratings or pre-binarized labels.

    ``kind`` is ``"rating"`` for self-assessment scores that still need the
    threshold rule, ``"label"`` for values that are already 0/1.
    """

    task: Task
    values: dict[tuple[str, str], float]
    kind: str = "label"

    def __post_init__(self):
        if self.kind not in ("rating", "label"):
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.kind == "label":
            bad = [k for k, v in self.values.items() if v not in (0, 1)]
            if bad:
                raise ValueError(f"binary labels must be 0 or 1; offending entry {bad[0]}")

    def lookup(self, subject_id: str, trial_id: str) -> float:
        key = (subject_id, trial_id)
        if key in self.values:
            return self.values[key]
        wildcard = (subject_id, ANY_TRIAL)
        if wildcard in self.values:
            return self.values[wildcard]
        raise KeyError(f"no label for subject {subject_id!r}, trial {trial_id!r}")

    def binary(self, subject_id: str, trial_id: str, threshold: float = 5.0) -> int:
        value = self.lookup(subject_id, trial_id)
        if self.kind == "label":
            return int(value)
        return int(value >= threshold)


# ---------------------------------------------------------------------------
# binary container


def write_container(path, meta: dict, values: np.ndarray) -> None:
    """Write ``values`` (any shape) as float32 with a JSON metadata block.

    The array shape is stored under ``meta["shape"]``. Output bytes depend only
    on the inputs, so repeated writes are byte-identical.
    """
    arr = np.ascontiguousarray(values, dtype="<f4")
    meta = dict(meta)
    meta["shape"] = list(arr.shape)
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, CONTAINER_VERSION, len(blob)))
        fh.write(blob)
        fh.write(_COUNT.pack(arr.size))
        fh.write(arr.tobytes(order="C"))


def read_container(path) -> tuple[dict, np.ndarray]:
    """Inverse of :func:`write_container`. Returns ``(meta, float32 array)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header", path)
    magic, version, meta_len = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", path)
    if version != CONTAINER_VERSION:
        raise FormatError(f"unsupported container version {version}", path)
    off = _HEADER.size
    try:
        meta = json.loads(raw[off:off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable metadata block ({exc})", path) from None
    off += meta_len
    if len(raw) < off + _COUNT.size:
        raise FormatError("truncated value count", path)
    (count,) = _COUNT.unpack_from(raw, off)
    off += _COUNT.size
    if len(raw) != off + 4 * count:
        raise FormatError(f"expected {count} float32 values, file holds {(len(raw) - off) / 4:g}", path)
    values = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
    shape = tuple(meta.get("shape", (count,)))
    if math.prod(shape) != count:
        raise FormatError(f"shape {shape} does not match {count} values", path)
    return meta, values.reshape(shape)


# ---------------------------------------------------------------------------
# recordings


def save_recording(rec: RawRecording, path, format: str = "raw_f32") -> None:
    """Persist a recording. ``raw_f32`` stores samples as float32.

    Data that is exactly representable in float32 (anything loaded from a
    ``raw_f32`` file, for instance) round-trips bit-exactly.
    """
    if format == "raw_f32":
        meta = {
            "kind": "recording",
            "subject": rec.subject_id,
            "trial": rec.trial_id,
            "rate_hz": rec.sample_rate_hz,
            "channels": list(rec.channels),
        }
        write_container(path, meta, rec.data)
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subject", rec.subject_id])
            w.writerow(["trial", rec.trial_id])
            w.writerow(["rate_hz", repr(rec.sample_rate_hz)])
            w.writerow(["channels", *rec.channels])
            for row in rec.data:
                w.writerow([repr(float(v)) for v in row])
    else:
        raise ValueError(f"unknown recording format {format!r}")


def _read_header_line(row, expected: str, path, lineno: int) -> list[str]:
    if not row or row[0].strip() != expected or len(row) < 2:
        raise FormatError(f"malformed header: expected '{expected},...'", path, lineno)
    return [c.strip() for c in row[1:]]


def _load_csv_recording(path) -> RawRecording:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 4:
        raise FormatError("malformed header: fewer than 4 header lines", path)
    subject = _read_header_line(rows[0], "subject", path, 1)[0]
    trial = _read_header_line(rows[1], "trial", path, 2)[0]
    rate_text = _read_header_line(rows[2], "rate_hz", path, 3)[0]
    try:
        rate = float(rate_text)
    except ValueError:
        raise FormatError(f"malformed header: rate_hz {rate_text!r} is not a number", path, 3) from None
    if not (rate > 0 and math.isfinite(rate)):
        raise FormatError(f"malformed header: rate_hz must be positive, got {rate_text}", path, 3)
    channels = _read_header_line(rows[3], "channels", path, 4)
    if len(set(channels)) != len(channels):
        raise FormatError("malformed header: duplicate channel names", path, 4)

    body = [(i + 5, r) for i, r in enumerate(rows[4:]) if any(c.strip() for c in r)]
    if len(body) != len(channels):
        raise FormatError(f"header lists {len(channels)} channels but file has {len(body)} data rows", path)
    data = []
    for lineno, row in body:
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise FormatError("non-numeric sample", path, lineno) from None
        data.append(vals)
    lengths = {len(r) for r in data}
    if len(lengths) != 1:
        short = min(body, key=lambda b: len(b[1]))[0]
        raise FormatError("ragged rows: channel rows differ in length", path, short)
    arr = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = int(np.argwhere(~np.isfinite(arr))[0, 0])
        raise FormatError("non-finite values", path, body[bad][0])
    return RawRecording(subject, trial, rate, tuple(channels), arr)


def _load_f32_recording(path) -> RawRecording:
    meta, values = read_container(path)
    if meta.get("kind") != "recording":
        raise FormatError(f"container holds {meta.get('kind')!r}, not a recording", path)
    try:
        subject, trial = str(meta["subject"]), str(meta["trial"])
        rate, channels = float(meta["rate_hz"]), list(meta["channels"])
    except KeyError as exc:
        raise FormatError(f"malformed header: missing {exc.args[0]!r}", path) from None
    if values.ndim != 2 or values.shape[0] != len(channels):
        raise FormatError(f"data shape {values.shape} does not match {len(channels)} channels", path)
    if not np.all(np.isfinite(values)):
        raise FormatError("non-finite values", path)
    return RawRecording(subject, trial, rate, tuple(channels), values.astype(np.float64))


def load_recording(path, format: str | None = None) -> RawRecording:
    """Load and validate a recording. ``format`` defaults from the file suffix."""
    if format is None:
        format = "csv" if str(path).lower().endswith(".csv") else "raw_f32"
    if format == "csv":
        return _load_csv_recording(path)
    if format == "raw_f32":
        return _load_f32_recording(path)
    raise ValueError(f"unknown recording format {format!r}")


# ---------------------------------------------------------------------------
# montages and labels


def load_montage(path) -> Montage:
    """Read a ``name,x,y`` montage file (optional header line)."""
    entries: dict[str, tuple[float, float]] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or not any(row) or row[0].startswith("#"):
                continue
            if lineno == 1 and row[:3] == ["name", "x", "y"]:
                continue
            if len(row) != 3:
                raise FormatError("expected name,x,y", path, lineno)
            name = row[0]
            try:
                x, y = float(row[1]), float(row[2])
            except ValueError:
                raise FormatError("non-numeric coordinate", path, lineno) from None
            if name in entries:
                raise FormatError(f"duplicate electrode name {name!r}", path, lineno)
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise FormatError(f"coordinate of {name!r} outside [0, 1]", path, lineno)
            entries[name] = (x, y)
    if not entries:
        raise FormatError("montage is empty", path)
    try:
        return Montage(entries)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def default_montage_path(n_channels: int = 34) -> Path:
    """Path of a shipped flat 10-20 montage (34-channel SAD layout or 32-channel DEAP layout)."""
    if n_channels not in (32, 34):
        raise ValueError("shipped montages have 32 or 34 electrodes")
    return Path(__file__).parent / "data" / f"montage{n_channels}.csv"


def default_montage(n_channels: int = 34) -> Montage:
    return load_montage(default_montage_path(n_channels))


def load_labels(path, task: Task | str) -> LabelSet:
    """Read ``subject,trial,rating`` (thresholded later) or ``subject,trial,label`` files."""
    task = Task(task)
    values: dict[tuple[str, str], float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [c.strip() for c in next(reader, [])]
        if header[:2] != ["subject", "trial"] or len(header) != 3 or header[2] not in ("rating", "label"):
            raise FormatError("malformed header: expected subject,trial,rating or subject,trial,label", path, 1)
        kind = header[2]
        for lineno, row in enumerate(reader, start=2):
            row = [c.strip() for c in row]
            if not any(row):
                continue
            if len(row) != 3:
                raise FormatError("expected 3 fields", path, lineno)
            try:
                value = float(row[2])
            except ValueError:
                raise FormatError(f"non-numeric {kind}", path, lineno) from None
            if not math.isfinite(value):
                raise FormatError(f"non-finite {kind}", path, lineno)
            if kind == "label" and value not in (0.0, 1.0):
                raise FormatError("labels must be 0 or 1", path, lineno)
            key = (row[0], row[1])
            if key in values:
                raise FormatError(f"duplicate entry for {key}", path, lineno)
            values[key] = value
    return LabelSet(task, values, kind)


def save_labels(labels: LabelSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "trial", labels.kind])
        for (s, t), v in labels.values.items():
            w.writerow([s, t, int(v) if labels.kind == "label" else repr(v)])


def apply_labels(recordings, labels: LabelSet, threshold: float = 5.0) -> list[tuple[RawRecording, int]]:
    """Attach a binary label to every recording.

    Ratings map to 1 when ``rating >= threshold``; pre-binarized labels pass
    through unchanged.
    """
    out = []
    for rec in recordings:
        try:
            out.append((rec, labels.binary(rec.subject_id, rec.trial_id, threshold)))
        except KeyError:
            raise ValueError(f"recording {rec.subject_id}/{rec.trial_id} has no label entry") from None
    return out


def find_recordings(directory) -> list[Path]:
    """Recording files in ``directory`` (``*.csv`` and ``*.f32``), sorted by name."""
    directory = Path(directory)
    files = [p for p in directory.iterdir() if p.suffix.lower() in (".csv", ".f32") and p.is_file()]
    return sorted(files)
