"""Multi-damage localization across overlapping sub-regions.

Each damaged region is imaged independently; overlapping regions can then
report the same physical damage twice. Candidates are merged by a single
greedy pass in descending score order: a candidate pairs with the nearest
unprocessed candidate inside the distance threshold (by score rank) and the
pair is replaced by its coordinate average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, ConfigError
from .autoencoder import KAEModel
from .health import DamageIndexSet, HealthReport, compute_di_set, detect
from .imaging import DamageMap, ImagingGrid, MRAPIDParams, PeakParams, fuse, select_paths
from .signals import GWSignal, Region, SensorLayout, enumerate_paths


@dataclass(frozen=True)
class CandidateDamage:
    """One extracted peak: where a region's imaging says damage sits."""

    x: float
    y: float
    region_id: int
    score: float


@dataclass(frozen=True)
class MergeConfig:
    distance_threshold: float = 30.0

    def __post_init__(self):
        if not (math.isfinite(self.distance_threshold) and self.distance_threshold > 0):
            raise ConfigError(f"distance_threshold must be > 0, got {self.distance_threshold}")


@dataclass(frozen=True)
class FinalDamage:
    x: float
    y: float
    score: float
    contributing_regions: tuple[int, ...]


def localize_region(model: KAEModel, signals: list[GWSignal], layout: SensorLayout,
                    region: Region, thresholds, params: MRAPIDParams = MRAPIDParams(),
                    resolution: float = 2.0, peak_params: PeakParams = PeakParams(),
                    reduction: str = "mean") -> tuple[HealthReport, DamageIndexSet, DamageMap | None]:
    """Detect one region and image it when the verdict is damaged."""
    dis = compute_di_set(model, signals, layout, region, reduction)
    report = detect(dis, thresholds)
    if not report.damaged:
        return report, dis, None
    if params.top_k is not None:
        paths = select_paths(dis, params.top_k)
    else:
        paths = enumerate_paths(layout, region)
    grid = ImagingGrid(region.bounds, resolution)
    return report, dis, fuse(paths, dis, layout, grid, params, peak_params)


def localize_all(layout: SensorLayout, signals: list[GWSignal], model: KAEModel,
                 thresholds: dict[int, float], params: MRAPIDParams = MRAPIDParams(),
                 resolution: float = 2.0, peak_params: PeakParams = PeakParams(),
                 reduction: str = "mean") -> list[CandidateDamage]:
    """Run detection + imaging over every region; candidates from damaged ones."""
    for region in layout.regions:
        if region.id not in thresholds:
            raise CalibrationError(f"region {region.id}: threshold not calibrated")
    candidates: list[CandidateDamage] = []
    for region in layout.regions:
        _, _, dmap = localize_region(
            model, signals, layout, region, thresholds, params, resolution, peak_params, reduction
        )
        if dmap is not None:
            candidates.extend(CandidateDamage(p.x, p.y, region.id, p.value) for p in dmap.peaks)
    return candidates


def merge_duplicates(candidates: list[CandidateDamage],
                     cfg: MergeConfig = MergeConfig()) -> list[FinalDamage]:
    """Collapse duplicate detections from overlapping regions.

    Candidates are visited in descending score order; each unprocessed
    candidate either pairs with the next unprocessed candidate within the
    threshold (both consumed, midpoint kept) or survives unchanged. Every
    input is consumed exactly once.
    """
    order = sorted(candidates, key=lambda c: (-c.score, c.region_id, c.x, c.y))
    processed = [False] * len(order)
    merged: list[FinalDamage] = []
    for i, cand in enumerate(order):
        if processed[i]:
            continue
        processed[i] = True
        partner_idx = None
        for j in range(i + 1, len(order)):
            if not processed[j] and math.hypot(cand.x - order[j].x, cand.y - order[j].y) < cfg.distance_threshold:
                partner_idx = j
                break
        if partner_idx is None:
            merged.append(FinalDamage(cand.x, cand.y, cand.score, (cand.region_id,)))
        else:
            processed[partner_idx] = True
            other = order[partner_idx]
            regions = tuple(sorted({cand.region_id, other.region_id}))
            merged.append(
                FinalDamage((cand.x + other.x) / 2.0, (cand.y + other.y) / 2.0, cand.score, regions)
            )
    return merged


def final_damages_doc(damages: list[FinalDamage]) -> list[dict]:
    return [
        {
            "x_mm": d.x,
            "y_mm": d.y,
            "score": d.score,
            "contributing_regions": list(d.contributing_regions),
        }
        for d in damages
    ]
