"""File formats: signal CSV datasets, layout JSON, and the truth manifest.

Waveform cells are written with `repr`, which round-trips IEEE doubles
exactly in at most 17 significant digits.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .signals import GWSignal, Rect, Region, Sensor, SensorLayout, make_path

_FIXED_COLUMNS = ("actuator_id", "sensor_id", "repetition")


def save_dataset(path, signals: list[GWSignal]) -> None:
    """Write one waveform per row: actuator_id,sensor_id,repetition,s0..s{m-1}."""
    if not signals:
        raise DataError("refusing to write an empty dataset")
    m = len(signals[0])
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_FIXED_COLUMNS) + [f"s{i}" for i in range(m)])
        for sig in signals:
            if len(sig) != m:
                raise DataError(f"inconsistent sample count: {len(sig)} != {m}")
            writer.writerow(
                [sig.path.actuator_id, sig.path.sensor_id, sig.repetition]
                + [repr(float(v)) for v in sig.samples]
            )


def load_dataset(path, layout: SensorLayout, sample_rate: float = 12e6) -> list[GWSignal]:
    """Read a signal CSV, validating ids against the layout.

    The CSV carries no rate column; `sample_rate` is supplied by the caller
    (normally from the pipeline configuration).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    signals: list[GWSignal] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:3]) != _FIXED_COLUMNS:
            raise DataError(f"{path}: missing or malformed header row")
        m = len(header) - 3
        if m < 1:
            raise DataError(f"{path}: header declares no sample columns")
        for row_idx, row in enumerate(reader, start=2):
            if len(row) != m + 3:
                raise DataError(f"{path} row {row_idx}: expected {m + 3} cells, got {len(row)}")
            try:
                act, sen, rep = int(row[0]), int(row[1]), int(row[2])
            except ValueError as exc:
                raise DataError(f"{path} row {row_idx}: non-integer id field ({exc})") from None
            for sid in (act, sen):
                if sid not in {s.id for s in layout.sensors}:
                    raise DataError(f"{path} row {row_idx}: unknown sensor id {sid}")
            try:
                samples = np.array(row[3:], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path} row {row_idx}: non-numeric sample cell") from None
            if not np.all(np.isfinite(samples)):
                raise DataError(f"{path} row {row_idx}: non-finite sample value")
            signals.append(GWSignal(make_path(act, sen), rep, samples, sample_rate))
    return signals


def save_layout(path, layout: SensorLayout) -> None:
    doc = {
        "sensors": [{"id": s.id, "x_mm": s.x, "y_mm": s.y} for s in layout.sensors],
        "regions": [
            {
                "id": r.id,
                "sensor_ids": list(r.sensor_ids),
                "bounds": {"x0": r.bounds.x0, "y0": r.bounds.y0, "x1": r.bounds.x1, "y1": r.bounds.y1},
            }
            for r in layout.regions
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_layout(path) -> SensorLayout:
    path = Path(path)
    if not path.exists():
        raise DataError(f"layout file not found: {path}")
    try:
        doc = json.loads(path.read_text())
        sensors = tuple(Sensor(int(s["id"]), float(s["x_mm"]), float(s["y_mm"])) for s in doc["sensors"])
        regions = tuple(
            Region(
                int(r["id"]),
                tuple(int(i) for i in r["sensor_ids"]),
                Rect(
                    float(r["bounds"]["x0"]),
                    float(r["bounds"]["y0"]),
                    float(r["bounds"]["x1"]),
                    float(r["bounds"]["y1"]),
                ),
            )
            for r in doc.get("regions", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed layout file ({exc})") from None
    return SensorLayout(sensors, regions)


def save_truth(path, damages: list[dict]) -> None:
    """Write the ground-truth manifest: damage centers and diameters."""
    Path(path).write_text(json.dumps({"damages": damages}, indent=2) + "\n")


def load_truth(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"truth manifest not found: {path}")
    try:
        doc = json.loads(path.read_text())
        return [
            {"x_mm": float(d["x_mm"]), "y_mm": float(d["y_mm"]), "diameter_mm": float(d["diameter_mm"])}
            for d in doc["damages"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed truth manifest ({exc})") from None
