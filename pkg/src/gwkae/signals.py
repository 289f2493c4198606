"""Domain types for sensors, regions, sensing paths, and guided-wave signals.

All types are immutable after construction; the operations here are pure, so
they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class Sensor:
    """A piezoelectric transducer at a fixed position (millimetres)."""

    id: int
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError(f"sensor {self.id}: coordinates must be finite")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in millimetres, corners (x0, y0) and (x1, y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x0, self.y0, self.x1, self.y1)):
            raise ConfigError("rectangle corners must be finite")
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ConfigError(f"degenerate rectangle {self!r}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass(frozen=True)
class Region:
    """A monitored sub-area: the sensors assigned to it plus its bounds."""

    id: int
    sensor_ids: tuple[int, ...]
    bounds: Rect

    def __post_init__(self):
        object.__setattr__(self, "sensor_ids", tuple(self.sensor_ids))
        if len(set(self.sensor_ids)) != len(self.sensor_ids):
            raise ConfigError(f"region {self.id}: duplicate sensor ids")
        if len(self.sensor_ids) < 2:
            raise ConfigError(f"region {self.id}: needs at least 2 sensors")


@dataclass(frozen=True, order=True)
class SensingPath:
    """Canonical actuator->sensor pair; reverse paths collapse onto one record."""

    actuator_id: int
    sensor_id: int

    def __post_init__(self):
        if self.actuator_id >= self.sensor_id:
            raise ConfigError(
                f"path ({self.actuator_id}, {self.sensor_id}) is not canonical; "
                "use make_path() to collapse reverse pairs"
            )


def make_path(a: int, b: int) -> SensingPath:
    """Build the canonical path for an unordered transducer pair."""
    if a == b:
        raise ConfigError(f"path endpoints must differ, got {a} twice")
    return SensingPath(min(a, b), max(a, b))


@dataclass(frozen=True)
class SensorLayout:
    """Full sensor network: all transducers and the declared regions."""

    sensors: tuple[Sensor, ...]
    regions: tuple[Region, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))
        object.__setattr__(self, "regions", tuple(self.regions))
        ids = [s.id for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise ConfigError("sensor ids must be unique within a layout")
        by_id = {s.id: s for s in self.sensors}
        for region in self.regions:
            for sid in region.sensor_ids:
                if sid not in by_id:
                    raise ConfigError(f"region {region.id}: unknown sensor id {sid}")
                s = by_id[sid]
                if not region.bounds.contains(s.x, s.y):
                    raise ConfigError(
                        f"region {region.id}: sensor {sid} at ({s.x}, {s.y}) "
                        f"lies outside bounds {region.bounds!r}"
                    )
        object.__setattr__(self, "_by_id", by_id)

    def sensor(self, sensor_id: int) -> Sensor:
        try:
            return self._by_id[sensor_id]
        except KeyError:
            raise DataError(f"unknown sensor id {sensor_id}") from None

    def region(self, region_id: int) -> Region:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise ConfigError(f"unknown region id {region_id}")


@dataclass(frozen=True, eq=False)
class GWSignal:
    """One actuator->sensor waveform: the unit of ingestion and scoring."""

    path: SensingPath
    repetition: int
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("signal samples must be a non-empty 1-D sequence")
        object.__setattr__(self, "samples", arr)
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        arr.setflags(write=False)

    def __len__(self) -> int:
        return self.samples.size

    def normalized(self) -> "GWSignal":
        """Return a copy with samples mapped onto [0, 1]."""
        return GWSignal(self.path, self.repetition, normalize_signal(self.samples), self.sample_rate)


def normalize_signal(raw) -> np.ndarray:
    """Min-max map a waveform onto [0, 1].

    A constant signal has no range to stretch, so every sample maps to the
    neutral midpoint 0.5.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise DataError("cannot normalize an empty sequence")
    if not np.all(np.isfinite(arr)):
        raise DataError("signal contains non-finite samples")
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        return np.full(arr.shape, 0.5)
    return (arr - lo) / (hi - lo)


def enumerate_paths(layout: SensorLayout, region: Region) -> list[SensingPath]:
    """All n(n-1)/2 canonical pitch-catch pairs of a region, sorted by ids."""
    ids = sorted(region.sensor_ids)
    if len(ids) < 2:
        raise ConfigError(f"region {region.id}: needs at least 2 sensors to form paths")
    for sid in ids:
        layout.sensor(sid)  # fails loudly on an id the layout does not know
    return [SensingPath(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]


def all_layout_paths(layout: SensorLayout) -> list[SensingPath]:
    """Union of every region's path set, canonically sorted and de-duplicated."""
    seen: set[SensingPath] = set()
    for region in layout.regions:
        seen.update(enumerate_paths(layout, region))
    return sorted(seen)
