"""Probabilistic elliptical damage imaging.

Each sensing path spreads its damage index over an elliptical band around the
actuator-sensor segment. The band coordinate is the ellipse excess

    e = (|P - A| + |P - S|) / |A - S| - 1

which is 0 exactly on the segment. A tent-shaped weight places each path's
contribution at an offset that shrinks as its DI approaches the maximum DI,
so the strongest paths pull the fused peak onto themselves. Summing
weight * DI over paths yields the damage-probability raster.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, GeometryError
from .health import DamageIndexSet
from .signals import Rect, Sensor, SensingPath, SensorLayout


@dataclass(frozen=True)
class ImagingGrid:
    """Raster geometry: pixel centers on a regular grid inside bounds."""

    bounds: Rect
    resolution: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.resolution) and self.resolution > 0):
            raise ConfigError(f"resolution must be > 0, got {self.resolution}")

    @property
    def nx(self) -> int:
        return max(1, math.ceil(self.bounds.width / self.resolution))

    @property
    def ny(self) -> int:
        return max(1, math.ceil(self.bounds.height / self.resolution))

    def xs(self) -> np.ndarray:
        return self.bounds.x0 + (np.arange(self.nx) + 0.5) * self.resolution

    def ys(self) -> np.ndarray:
        return self.bounds.y0 + (np.arange(self.ny) + 0.5) * self.resolution


@dataclass(frozen=True)
class MRAPIDParams:
    """Imaging knobs: ellipse band shape r and optional top-k path selection."""

    r: float = 0.05
    top_k: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise ConfigError(f"shape parameter r must be > 0, got {self.r}")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")


@dataclass(frozen=True)
class PeakParams:
    """Greedy non-maximum-suppression settings for peak extraction."""

    max_peaks: int = 3
    min_separation: float = 30.0
    rel_threshold: float = 0.7

    def __post_init__(self):
        if self.max_peaks < 1:
            raise ConfigError(f"max_peaks must be >= 1, got {self.max_peaks}")
        if self.min_separation < 0 or not 0 <= self.rel_threshold <= 1:
            raise ConfigError("min_separation >= 0 and rel_threshold in [0, 1] required")


@dataclass(frozen=True)
class Peak:
    x: float
    y: float
    value: float


@dataclass
class DamageMap:
    """Fused damage-probability raster plus its extracted peaks."""

    grid: ImagingGrid
    values: np.ndarray  # (ny, nx), row iy maps to ys()[iy]
    peaks: list[Peak] = field(default_factory=list)


def ellipse_distance(pixel: tuple[float, float], actuator: Sensor, sensor: Sensor) -> float:
    """Ellipse distance ratio of a pixel for one path; 1.0 on the segment."""
    ax, ay, sx, sy = actuator.x, actuator.y, sensor.x, sensor.y
    base = math.hypot(sx - ax, sy - ay)
    if base == 0.0:
        raise GeometryError(f"actuator {actuator.id} and sensor {sensor.id} coincide")
    px, py = pixel
    return (math.hypot(px - ax, py - ay) + math.hypot(px - sx, py - sy)) / base


def weight(e: float, di: float, di_max: float, r: float) -> float:
    """Tent weight of one path at ellipse excess e >= 0.

    The tent peaks at value 1 when e = (1 - di/di_max) * r and falls to 0 at
    e = (2 - di/di_max) * r; at e = 0 it starts from di/di_max. Paths with the
    maximum DI therefore concentrate weight directly on their segment.
    """
    if di_max <= 0:
        raise DataError("di_max must be > 0: no damaged-path information to image")
    if not 0 <= di <= di_max:
        raise DataError(f"DI {di} outside [0, {di_max}]")
    if e < 0 or r <= 0:
        raise DataError("requires e >= 0 and r > 0")
    offset = 1.0 - di / di_max
    if e < offset * r:
        return 1.0 + (e / r - offset)
    if e < (1.0 + offset) * r:
        return 1.0 - (e / r - offset)
    return 0.0


def _weight_grid(e: np.ndarray, di: float, di_max: float, r: float) -> np.ndarray:
    offset = 1.0 - di / di_max
    rising = 1.0 + (e / r - offset)
    falling = 1.0 - (e / r - offset)
    out = np.where(e < offset * r, rising, np.where(e < (1.0 + offset) * r, falling, 0.0))
    return out


def fuse(paths: list[SensingPath], dis: DamageIndexSet, layout: SensorLayout,
         grid: ImagingGrid, params: MRAPIDParams = MRAPIDParams(),
         peak_params: PeakParams = PeakParams()) -> DamageMap:
    """Fuse the supplied paths' DI contributions into a damage map.

    di_max is taken over the supplied paths, so a top-k subset renormalizes
    among itself. An all-zero DI set yields a zero map with no peaks.
    """
    if not paths:
        raise DataError("fuse needs at least one path")
    di_values = [dis.di(p) for p in paths]
    di_max = max(di_values)
    xs = grid.xs()
    ys = grid.ys()
    px, py = np.meshgrid(xs, ys)
    values = np.zeros((grid.ny, grid.nx))
    if di_max > 0:
        for path, di in zip(paths, di_values):
            a = layout.sensor(path.actuator_id)
            s = layout.sensor(path.sensor_id)
            base = math.hypot(s.x - a.x, s.y - a.y)
            if base == 0.0:
                raise GeometryError(f"path {path}: coincident transducers")
            excess = (np.hypot(px - a.x, py - a.y) + np.hypot(px - s.x, py - s.y)) / base - 1.0
            values += _weight_grid(excess, di, di_max, params.r) * di
    dmap = DamageMap(grid, values)
    dmap.peaks = extract_peaks(dmap, peak_params)
    return dmap


def select_paths(dis: DamageIndexSet, k: int) -> list[SensingPath]:
    """The k highest-DI paths, ties broken by canonical path order."""
    if not dis.entries:
        raise DataError("cannot select paths from an empty DI set")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    ranked = sorted(dis.entries, key=lambda pd: (-pd[1], pd[0]))
    return [p for p, _ in ranked[:k]]


def extract_peaks(dmap: DamageMap, params: PeakParams = PeakParams()) -> list[Peak]:
    """Greedy NMS over local maxima of the raster.

    Repeatedly takes the largest remaining local maximum at or above
    rel_threshold * global max, suppressing anything within min_separation of
    an accepted peak. Coordinates are pixel centers. A zero map has no peaks.
    """
    v = dmap.values
    gmax = float(v.max(initial=0.0))
    if gmax <= 0.0:
        return []
    padded = np.full((v.shape[0] + 2, v.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = v
    is_max = np.ones_like(v, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            is_max &= v >= padded[1 + dy : 1 + dy + v.shape[0], 1 + dx : 1 + dx + v.shape[1]]
    iy, ix = np.nonzero(is_max & (v >= params.rel_threshold * gmax))
    xs = dmap.grid.xs()
    ys = dmap.grid.ys()
    candidates = sorted(
        ((float(v[y, x]), float(xs[x]), float(ys[y])) for y, x in zip(iy, ix)),
        key=lambda c: (-c[0], c[2], c[1]),
    )
    peaks: list[Peak] = []
    for value, x, y in candidates:
        if len(peaks) >= params.max_peaks:
            break
        if any(math.hypot(x - p.x, y - p.y) < params.min_separation for p in peaks):
            continue
        peaks.append(Peak(x, y, value))
    return peaks


def map_to_csv(dmap: DamageMap, path) -> None:
    """Write the raster as x_mm,y_mm,P rows (row-major, y outer)."""
    xs = dmap.grid.xs()
    ys = dmap.grid.ys()
    lines = ["x_mm,y_mm,P"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            lines.append(f"{float(x)!r},{float(y)!r},{float(dmap.values[iy, ix])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def map_to_pgm(dmap: DamageMap, path) -> None:
    """Write a 16-bit binary PGM, min-max scaled per map; top row = largest y."""
    v = dmap.values
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    pixels = np.flipud(np.round(scaled * 65535).astype(np.uint16))
    with Path(path).open("wb") as fh:
        fh.write(f"P5 {v.shape[1]} {v.shape[0]} 65535\n".encode("ascii"))
        fh.write(struct.pack(f">{pixels.size}H", *pixels.reshape(-1).tolist()))


def peaks_to_json(peaks: list[Peak]) -> str:
    return json.dumps([{"x_mm": p.x, "y_mm": p.y, "P": p.value} for p in peaks], indent=2)
