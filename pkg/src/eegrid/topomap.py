"""Electrode-to-pixel projection and K x K interpolated feature images (model 2).

Every interpolation method here is linear in the sensor values, so each
(projection, config) pair compiles to a (K*K, M) operator matrix. Sensor
pixels get exact one-hot rows, which keeps sensor values bit-exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

from .features import FeatureMatrix
from .recording import Montage

ALLOWED_GRID_SIZES = (10, 15, 20, 25)
DEFAULT_GRID_SIZE = 15
DEFAULT_D_MAX = 3.0


class InterpMethod(str, Enum):
    IDW_NEAREST_BORDER = "idw_nearest_border"
    IDW_ZERO_BORDER = "idw_zero_border"
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    CUBIC_BSPLINE = "cubic_bspline"

    @property
    def is_idw(self) -> bool:
        return self in (InterpMethod.IDW_NEAREST_BORDER, InterpMethod.IDW_ZERO_BORDER)


@dataclass(frozen=True)
class InterpConfig:
    method: InterpMethod = InterpMethod.IDW_NEAREST_BORDER
    d_max: float = DEFAULT_D_MAX
    idw_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "method", InterpMethod(self.method))
        if not self.d_max > 0:
            raise ValueError("d_max must be positive")
        if not self.idw_power > 0:
            raise ValueError("idw_power must be positive")


@dataclass(frozen=True, eq=False)
class SensorProjection:
    grid_size: int
    channels: tuple[str, ...]
    pixels: np.ndarray  # (M, 2) integer (row, col)

    @property
    def pixel_of(self) -> dict[str, tuple[int, int]]:
        return {c: (int(r), int(k)) for c, (r, k) in zip(self.channels, self.pixels)}

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros((self.grid_size, self.grid_size), dtype=bool)
        m[self.pixels[:, 0], self.pixels[:, 1]] = True
        return m

    def __hash__(self):
        return hash((self.grid_size, self.channels, self.pixels.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, SensorProjection) and self.grid_size == other.grid_size
                and self.channels == other.channels and np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True, eq=False)
class FeatureGrid:
    """One window as a (K, K, B) stack of feature images."""

    data: np.ndarray
    feature_layout: tuple[str, ...]
    subject_id: str = ""
    trial_id: str = ""
    window_index: int = 0
    label: int | None = None

    def replace_data(self, data: np.ndarray) -> "FeatureGrid":
        return FeatureGrid(data, self.feature_layout, self.subject_id, self.trial_id,
                           self.window_index, self.label)


def _round_half_up(v: np.ndarray) -> np.ndarray:
    return np.floor(v + 0.5).astype(int)


def project_montage(montage: Montage, grid_size: int = DEFAULT_GRID_SIZE,
                    channels=None) -> SensorProjection:
    """Map each electrode to pixel ``(round(y (K-1)), round(x (K-1)))``.

    ``channels`` picks and orders the electrodes (default: montage order).
    """
    if grid_size < 4:
        raise ValueError("grid size must be at least 4")
    channels = tuple(channels) if channels is not None else tuple(montage.names)
    if not channels:
        raise ValueError("empty sensor set")
    montage.check_covers(channels)
    xy = np.array([montage.position(c) for c in channels], dtype=float)
    pixels = np.stack([_round_half_up(xy[:, 1] * (grid_size - 1)),
                       _round_half_up(xy[:, 0] * (grid_size - 1))], axis=1)
    seen: dict[tuple[int, int], str] = {}
    for c, (r, k) in zip(channels, pixels):
        key = (int(r), int(k))
        if key in seen:
            raise ValueError(f"electrodes {seen[key]!r} and {c!r} collide at pixel {key} for K={grid_size}")
        seen[key] = c
    pixels.setflags(write=False)
    return SensorProjection(grid_size, channels, pixels)


def _pixel_distances(proj: SensorProjection) -> np.ndarray:
    k = proj.grid_size
    rr, cc = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    grid = np.stack([rr.ravel(), cc.ravel()], axis=1).astype(float)
    diff = grid[:, None, :] - proj.pixels[None, :, :].astype(float)
    return np.sqrt(np.sum(diff**2, axis=-1))  # (K*K, M)


def _sensor_rows(proj: SensorProjection) -> np.ndarray:
    return proj.pixels[:, 0] * proj.grid_size + proj.pixels[:, 1]


def _nearest_matrix(dist: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, i.e. the lowest channel index on ties
    op = np.zeros_like(dist)
    op[np.arange(dist.shape[0]), np.argmin(dist, axis=1)] = 1.0
    return op


def _pin_sensors(op: np.ndarray, proj: SensorProjection) -> np.ndarray:
    rows = _sensor_rows(proj)
    op[rows, :] = 0.0
    op[rows, np.arange(len(rows))] = 1.0
    return op


def _bspline_kernel(degree: int, dilation: int = 2) -> np.ndarray:
    from scipy.interpolate import BSpline

    half = (degree + 1) * dilation / 2
    taps = np.arange(-int(np.floor(half)), int(np.floor(half)) + 1, dtype=float)
    basis = BSpline.basis_element(np.arange(degree + 2) - (degree + 1) / 2, extrapolate=False)
    vals = np.nan_to_num(basis(taps / dilation)) / dilation
    vals = vals[vals > 0]
    return vals / vals.sum()


@lru_cache(maxsize=32)
def interpolation_matrix(proj: SensorProjection, cfg: InterpConfig) -> np.ndarray:
    """(K*K, M) operator with ``grid.ravel() = op @ sensor_values``."""
    dist = _pixel_distances(proj)
    method = cfg.method
    if method.is_idw:
        within = dist <= cfg.d_max
        # sensor pixels divide by zero here; their rows are re-pinned below
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(within, 1.0 / dist**cfg.idw_power, 0.0)
            total = w.sum(axis=1, keepdims=True)
            op = np.divide(w, total, out=np.zeros_like(w), where=total > 0)
        border = ~within.any(axis=1)
        if method is InterpMethod.IDW_NEAREST_BORDER:
            op[border] = _nearest_matrix(dist[border])
        else:
            op[border] = 0.0
    elif method is InterpMethod.NEAREST:
        op = _nearest_matrix(dist)
    else:
        degree = 1 if method is InterpMethod.BILINEAR else 3
        kernel = _bspline_kernel(degree)
        k = proj.grid_size
        dense = _nearest_matrix(dist).reshape(k, k, -1)
        dense = ndimage.convolve1d(dense, kernel, axis=0, mode="nearest")
        dense = ndimage.convolve1d(dense, kernel, axis=1, mode="nearest")
        op = dense.reshape(k * k, -1)
    op = _pin_sensors(np.array(op), proj)
    op.setflags(write=False)
    return op


def _grid_from_values(values: np.ndarray, proj: SensorProjection, cfg: InterpConfig) -> np.ndarray:
    """values (M, ...) in projection channel order -> (K, K, ...)."""
    op = interpolation_matrix(proj, cfg)
    flat = values.reshape(values.shape[0], -1)
    grid = op @ flat
    if cfg.method.is_idw:
        # convex weights: clamp away round-off so bounds hold exactly
        lo, hi = flat.min(axis=0), flat.max(axis=0)
        if cfg.method is InterpMethod.IDW_ZERO_BORDER:
            lo, hi = np.minimum(lo, 0.0), np.maximum(hi, 0.0)
        grid = np.clip(grid, lo, hi)
    rows = _sensor_rows(proj)
    grid[rows] = flat
    k = proj.grid_size
    return grid.reshape(k, k, *values.shape[1:])


def _values_array(values, proj: SensorProjection) -> np.ndarray:
    if isinstance(values, dict):
        missing = [c for c in proj.channels if c not in values]
        if missing:
            raise ValueError(f"no value for channels: {', '.join(missing)}")
        return np.array([values[c] for c in proj.channels], dtype=np.float64)
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[0] != len(proj.channels):
        raise ValueError(f"{arr.shape[0]} values for {len(proj.channels)} projected channels")
    return arr


def idw_interpolate(values, proj: SensorProjection, cfg: InterpConfig | None = None) -> np.ndarray:
    """Inverse-distance weighting within ``d_max``; border pixels per ``cfg.method``.

    ``values`` is a channel -> value mapping or an array in projection order.
    """
    cfg = cfg or InterpConfig()
    if not cfg.method.is_idw:
        raise ValueError(f"{cfg.method.value} is not an IDW method")
    return _grid_from_values(_values_array(values, proj), proj, cfg)


def classic_interpolate(values, proj: SensorProjection, cfg: InterpConfig) -> np.ndarray:
    """Nearest, bilinear or cubic B-spline image from scattered sensor values.

    Bilinear and cubic fill the grid with nearest-sensor values, smooth with a
    separable degree-1 or degree-3 B-spline kernel (dilated by 2 pixels), then
    restore the exact sensor values.
    """
    if cfg.method.is_idw:
        raise ValueError("use idw_interpolate for IDW methods")
    return _grid_from_values(_values_array(values, proj), proj, cfg)


def interpolate(values, proj: SensorProjection, cfg: InterpConfig | None = None) -> np.ndarray:
    cfg = cfg or InterpConfig()
    return _grid_from_values(_values_array(values, proj), proj, cfg)


def model2_tensor(fm: FeatureMatrix, proj: SensorProjection, cfg: InterpConfig | None = None) -> FeatureGrid:
    """Interpolate every feature column of a model-1 matrix onto the K x K grid."""
    index = {c: i for i, c in enumerate(fm.channels)}
    missing = [c for c in proj.channels if c not in index]
    if missing:
        raise ValueError(f"feature matrix lacks projected channels: {', '.join(missing)}")
    values = fm.data[[index[c] for c in proj.channels]]
    grid = interpolate(values, proj, cfg)
    return FeatureGrid(grid, fm.feature_layout, fm.subject_id, fm.trial_id, fm.window_index, fm.label)


def write_pgm(image: np.ndarray, path) -> None:
    """8-bit ASCII PGM, linearly scaled from the slice's min..max."""
    img = np.asarray(image, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    pix = np.round(scaled * 255).astype(int)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", "255"]
    lines += [" ".join(str(v) for v in row) for row in pix]
    Path(path).write_text("\n".join(lines) + "\n")


def write_slice_csv(image: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(image, dtype=float), delimiter=",", fmt="%.17g")
