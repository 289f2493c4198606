"""Damage indices, health indices, threshold calibration, and verdicts.

A path's damage index (DI) is the reconstruction error of its signal under
the trained autoencoder. A region's health index (HI) is the 95% quantile of
its path DIs; the detection threshold ThrV is the HI calibrated on held-out
pristine measurements, and a region is declared damaged iff HI > ThrV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autoencoder import KAEModel, loss
from .errors import CalibrationError, DataError, UsageError
from .signals import GWSignal, Region, SensingPath, SensorLayout, enumerate_paths

HI_QUANTILE = 0.95


@dataclass(frozen=True)
class DamageIndexSet:
    """Per-path DI values for one region and one measurement."""

    region_id: int
    entries: tuple[tuple[SensingPath, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((p, float(d)) for p, d in self.entries))
        for p, d in self.entries:
            if not (math.isfinite(d) and d >= 0):
                raise DataError(f"DI for path {p} must be finite and >= 0, got {d}")

    def values(self) -> list[float]:
        return [d for _, d in self.entries]

    def paths(self) -> list[SensingPath]:
        return [p for p, _ in self.entries]

    def di(self, path: SensingPath) -> float:
        for p, d in self.entries:
            if p == path:
                return d
        raise DataError(f"no DI recorded for path {path}")


@dataclass(frozen=True)
class HealthReport:
    region_id: int
    hi: float
    thrv: float
    damaged: bool


def compute_di(model: KAEModel, signal: GWSignal | np.ndarray, reduction: str = "mean") -> float:
    """Reconstruction error of one (normalized) signal: its damage index."""
    x = signal.samples if isinstance(signal, GWSignal) else np.asarray(signal, dtype=np.float64)
    return loss(x, model.reconstruct(x), reduction)


def compute_di_batch(model: KAEModel, signals: list[GWSignal], reduction: str = "mean",
                     chunk: int = 256) -> list[float]:
    """Damage index of every signal, reconstructed in batches for speed."""
    if not signals:
        return []
    x = np.stack([s.samples for s in signals])
    dis: list[float] = []
    for start in range(0, x.shape[0], chunk):
        xb = x[start : start + chunk]
        per_signal = np.sum((model.reconstruct(xb) - xb) ** 2, axis=1)
        if reduction == "mean":
            per_signal = per_signal / x.shape[1]
        dis.extend(float(v) for v in per_signal)
    return dis


def quantile(values, p: float) -> float:
    """Linear-interpolation quantile at position p*(n-1) of the sorted values."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DataError("quantile of an empty list is undefined")
    if not 0 <= p <= 1:
        raise UsageError(f"quantile fraction must be in [0, 1], got {p}")
    v = np.sort(arr)
    h = p * (v.size - 1)
    f = int(math.floor(h))
    if f >= v.size - 1:
        return float(v[-1])
    return float(v[f] + (h - f) * (v[f + 1] - v[f]))


def compute_hi(dis: DamageIndexSet) -> float:
    """Health index: the 95% quantile of the region's DI values."""
    if not dis.entries:
        raise DataError(f"region {dis.region_id}: no DI entries")
    return quantile(dis.values(), HI_QUANTILE)


def compute_di_set(model: KAEModel, signals: list[GWSignal], layout: SensorLayout,
                   region: Region, reduction: str = "mean") -> DamageIndexSet:
    """Score every enumerated path of a region from one measurement's signals.

    Only intra-region canonical paths are scored; any path without a signal is
    an error. When a path appears multiple times (repeated measurements in one
    file) its DI is the mean over repetitions.
    """
    region_paths = enumerate_paths(layout, region)
    wanted = set(region_paths)
    relevant = [s for s in signals if s.path in wanted]
    by_path: dict[SensingPath, list[float]] = {}
    for sig, di in zip(relevant, compute_di_batch(model, relevant, reduction)):
        by_path.setdefault(sig.path, []).append(di)
    entries = []
    for path in region_paths:
        if path not in by_path:
            raise DataError(f"region {region.id}: no signal for path {path}")
        entries.append((path, float(np.mean(by_path[path]))))
    return DamageIndexSet(region.id, tuple(entries))


def calibrate_threshold(pristine_sets: list[DamageIndexSet]) -> dict[int, float]:
    """ThrV per region: the HI of the pooled pristine DI values.

    Pooling all held-out repetitions gives the quantile more support than
    averaging per-repetition HIs would.
    """
    if not pristine_sets:
        raise CalibrationError("no pristine DI sets supplied")
    pooled: dict[int, list[float]] = {}
    for dis in pristine_sets:
        pooled.setdefault(dis.region_id, []).extend(dis.values())
    thresholds = {}
    for region_id, values in pooled.items():
        if not values:
            raise CalibrationError(f"region {region_id}: no pristine DI values")
        thresholds[region_id] = quantile(values, HI_QUANTILE)
    return thresholds


def detect(current: DamageIndexSet, thresholds) -> HealthReport:
    """Damaged verdict for one region: HI strictly above its threshold.

    `thresholds` is either the region's scalar ThrV or a mapping of region id
    to ThrV as produced by calibrate_threshold.
    """
    if isinstance(thresholds, dict):
        if current.region_id not in thresholds:
            raise UsageError(f"no calibrated threshold for region {current.region_id}")
        thrv = float(thresholds[current.region_id])
    else:
        thrv = float(thresholds)
    hi = compute_hi(current)
    return HealthReport(current.region_id, hi, thrv, damaged=hi > thrv)


def health_report_doc(report: HealthReport, dis: DamageIndexSet) -> dict:
    """JSON-ready form of one region's verdict with its per-path DIs."""
    if report.region_id != dis.region_id:
        raise UsageError(f"report region {report.region_id} != DI set region {dis.region_id}")
    return {
        "region_id": report.region_id,
        "HI": report.hi,
        "ThrV": report.thrv,
        "damaged": report.damaged,
        "per_path": [
            {"actuator": p.actuator_id, "sensor": p.sensor_id, "di": d} for p, d in dis.entries
        ],
    }
