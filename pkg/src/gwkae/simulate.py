"""Phenomenological guided-wave scenario generator.

Not physics: no dispersion, no mode conversion, no reflections. Its one job
is to produce datasets where damage provably perturbs exactly the paths that
pass near it, so end-to-end detection and localization have a known ground
truth. A path's signal is a delayed, attenuated toneburst; damage multiplies
the direct arrival by a shadow factor driven by the damage center's ellipse
excess for that path, and adds a weaker scattered arrival with the detour
delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio
from .errors import ConfigError
from .signals import GWSignal, Sensor, SensingPath, SensorLayout, all_layout_paths


@dataclass(frozen=True)
class SimParams:
    center_freq: float = 80e3
    cycles: int = 5
    sample_rate: float = 12e6
    n_samples: int = 6000
    group_velocity: float = 1.5e6  # mm/s
    attenuation: float = 1e-3  # 1/mm
    noise_sigma: float = 0.005
    scatter_coeff: float = 0.2
    shadow_depth: float = 0.6  # beta, fraction of direct arrival removed at e = 0
    shadow_width: float = 0.05  # sigma_w, in ellipse-excess units
    seed: int = 0

    def __post_init__(self):
        positives = {
            "center_freq": self.center_freq,
            "sample_rate": self.sample_rate,
            "group_velocity": self.group_velocity,
            "shadow_width": self.shadow_width,
        }
        for name, value in positives.items():
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be > 0, got {value}")
        if self.cycles < 1 or self.n_samples < 1:
            raise ConfigError("cycles and n_samples must be >= 1")
        if not 0 <= self.shadow_depth <= 1:
            raise ConfigError(f"shadow_depth must be in [0, 1], got {self.shadow_depth}")
        if self.attenuation < 0 or self.noise_sigma < 0 or self.scatter_coeff < 0:
            raise ConfigError("attenuation, noise_sigma, scatter_coeff must be >= 0")


@dataclass(frozen=True)
class DamageSpec:
    center: tuple[float, float]
    diameter: float

    def __post_init__(self):
        if not (math.isfinite(self.diameter) and self.diameter > 0):
            raise ConfigError(f"diameter must be > 0, got {self.diameter}")


def _burst_window(params: SimParams) -> np.ndarray:
    """The excitation wavelet: a Hanning-windowed sine over its own duration."""
    duration = params.cycles / params.center_freq
    n = int(round(duration * params.sample_rate)) + 1
    t = np.arange(n) / params.sample_rate
    envelope = 0.5 * (1.0 - np.cos(2.0 * np.pi * params.center_freq * t / params.cycles))
    wavelet = envelope * np.sin(2.0 * np.pi * params.center_freq * t)
    wavelet[t > duration] = 0.0
    return wavelet


def hanning_toneburst(params: SimParams) -> np.ndarray:
    """Excitation signal on the full acquisition window (burst at t = 0)."""
    duration = params.cycles / params.center_freq
    if duration > params.n_samples / params.sample_rate:
        raise ConfigError(
            f"burst of {duration * 1e6:.1f} us exceeds the "
            f"{params.n_samples / params.sample_rate * 1e6:.1f} us acquisition window"
        )
    burst = _burst_window(params)
    out = np.zeros(params.n_samples)
    out[: burst.size] = burst[: params.n_samples]
    return out


def _ellipse_excess(ax, ay, sx, sy, dx, dy) -> float:
    # deliberately local arithmetic: the simulator must not share code with imaging
    direct = math.hypot(sx - ax, sy - ay)
    detour = math.hypot(dx - ax, dy - ay) + math.hypot(sx - dx, sy - dy)
    return detour / direct - 1.0


def _place(signal: np.ndarray, wavelet: np.ndarray, delay_s: float, amplitude: float,
           params: SimParams) -> None:
    start = int(round(delay_s * params.sample_rate))
    if start + wavelet.size > signal.size:
        raise ConfigError(
            f"arrival at {delay_s * 1e6:.1f} us falls beyond the acquisition window"
        )
    signal[start : start + wavelet.size] += amplitude * wavelet


def simulate_path(actuator: Sensor, sensor: Sensor, damages: list[DamageSpec],
                  params: SimParams, repetition: int = 0,
                  rng: np.random.Generator | None = None) -> GWSignal:
    """One raw (un-normalized) path waveform for the given damage state."""
    if actuator.x == sensor.x and actuator.y == sensor.y:
        raise ConfigError(f"actuator {actuator.id} and sensor {sensor.id} coincide")
    if rng is None:
        rng = np.random.default_rng([params.seed, 0, actuator.id, sensor.id, repetition])
    wavelet = _burst_window(params)
    signal = np.zeros(params.n_samples)

    d_direct = math.hypot(sensor.x - actuator.x, sensor.y - actuator.y)
    shadow = 1.0
    for dmg in damages:
        excess = _ellipse_excess(actuator.x, actuator.y, sensor.x, sensor.y, *dmg.center)
        shadow *= 1.0 - params.shadow_depth * math.exp(-(excess**2) / (2.0 * params.shadow_width**2))
    _place(signal, wavelet, d_direct / params.group_velocity,
           shadow * math.exp(-params.attenuation * d_direct), params)

    for dmg in damages:
        detour = math.hypot(dmg.center[0] - actuator.x, dmg.center[1] - actuator.y) + math.hypot(
            sensor.x - dmg.center[0], sensor.y - dmg.center[1]
        )
        _place(signal, wavelet, detour / params.group_velocity,
               params.scatter_coeff * math.exp(-params.attenuation * detour), params)

    if params.noise_sigma > 0:
        signal = signal + rng.normal(0.0, params.noise_sigma, params.n_samples)
    a, s = (actuator.id, sensor.id) if actuator.id < sensor.id else (sensor.id, actuator.id)
    return GWSignal(SensingPath(a, s), repetition, signal, params.sample_rate)


@dataclass
class ScenarioData:
    baselines: list[GWSignal]
    damaged: list[GWSignal]
    truth: list[dict]


def generate_scenario(layout: SensorLayout, damages: list[DamageSpec], repetitions: int,
                      params: SimParams, out_dir=None,
                      damaged_repetitions: int = 1) -> ScenarioData:
    """Baseline and damaged datasets for every path of the layout's regions.

    Repetitions differ only in their noise draws; baseline and damaged
    captures use distinct noise streams even for the same repetition index.
    With a fixed seed the output is bit-identical across runs.
    """
    if repetitions < 1 or damaged_repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    paths = all_layout_paths(layout)
    if not paths:
        raise ConfigError("layout has no regions, so no paths to simulate")

    def run(damage_list, tag, n_reps):
        out = []
        for rep in range(n_reps):
            for path in paths:
                rng = np.random.default_rng(
                    [params.seed, tag, path.actuator_id, path.sensor_id, rep]
                )
                out.append(
                    simulate_path(layout.sensor(path.actuator_id), layout.sensor(path.sensor_id),
                                  damage_list, params, rep, rng)
                )
        return out

    scenario = ScenarioData(
        baselines=run([], 0, repetitions),
        damaged=run(damages, 1, damaged_repetitions),
        truth=[
            {"x_mm": d.center[0], "y_mm": d.center[1], "diameter_mm": d.diameter} for d in damages
        ],
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        dataio.save_dataset(out_dir / "baseline.csv", scenario.baselines)
        dataio.save_dataset(out_dir / "damaged.csv", scenario.damaged)
        dataio.save_truth(out_dir / "truth.json", scenario.truth)
    return scenario
