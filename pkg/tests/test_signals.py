import numpy as np
import pytest

from gwkae.errors import ConfigError, DataError
from gwkae.signals import (GWSignal, Rect, Region, Sensor, SensorLayout, enumerate_paths,
                           make_path, normalize_signal)


def square_layout():
    sensors = (Sensor(0, 0, 0), Sensor(1, 100, 0), Sensor(2, 0, 100), Sensor(3, 100, 100))
    region = Region(0, (0, 1, 2, 3), Rect(0, 0, 100, 100))
    return SensorLayout(sensors, (region,))


class TestNormalize:
    def test_affine_endpoints(self):
        assert normalize_signal([-1, 0, 1]).tolist() == [0.0, 0.5, 1.0]

    def test_degenerate_constant(self):
        assert normalize_signal([7, 7, 7]).tolist() == [0.5, 0.5, 0.5]

    def test_toneburst_extremes_match_brute_force_scan(self):
        # independent oracle: explicit min/max scan over the raw samples
        t = np.arange(400) / 1e6
        raw = 3.7 * np.sin(2 * np.pi * 5e4 * t) * np.hanning(400)
        lo, hi = raw[0], raw[0]
        for v in raw:
            lo = v if v < lo else lo
            hi = v if v > hi else hi
        out = normalize_signal(raw)
        assert out[np.argmin(raw)] == 0.0 and out[np.argmax(raw)] == 1.0
        np.testing.assert_allclose(out, (raw - lo) / (hi - lo), atol=0)

    def test_range_is_exactly_unit(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            raw = rng.normal(size=rng.integers(2, 64))
            out = normalize_signal(raw)
            assert out.min() == 0.0 and out.max() == 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            normalize_signal([0.0, np.nan, 1.0])
        with pytest.raises(DataError):
            normalize_signal([])


class TestPaths:
    def test_pair_count_nine_sensors(self):
        sensors = tuple(Sensor(i, 10.0 * (i % 3), 10.0 * (i // 3)) for i in range(9))
        region = Region(0, tuple(range(9)), Rect(-1, -1, 21, 21))
        layout = SensorLayout(sensors, (region,))
        assert len(enumerate_paths(layout, region)) == 36

    def test_single_pair(self):
        sensors = (Sensor(4, 0, 0), Sensor(9, 10, 0))
        layout = SensorLayout(sensors, (Region(0, (9, 4), Rect(-1, -1, 11, 1)),))
        paths = enumerate_paths(layout, layout.regions[0])
        assert paths == [make_path(9, 4)]
        assert paths[0].actuator_id == 4 and paths[0].sensor_id == 9

    def test_count_matches_double_loop_counter(self):
        n = 28
        sensors = tuple(Sensor(i, float(i), 0.0) for i in range(n))
        region = Region(0, tuple(range(n)), Rect(-1, -1, n + 1.0, 1.0))
        layout = SensorLayout(sensors, (region,))
        brute = 0
        for i in range(n):
            for j in range(i + 1, n):
                brute += 1
        assert brute == 378
        assert len(enumerate_paths(layout, region)) == brute

    def test_enumeration_is_order_insensitive(self):
        sensors = tuple(Sensor(i, float(i % 3) * 5, float(i // 3) * 5) for i in range(6))
        bounds = Rect(-1, -1, 11, 11)
        a = SensorLayout(sensors, (Region(0, (0, 1, 2, 3, 4, 5), bounds),))
        b = SensorLayout(sensors[::-1], (Region(0, (5, 3, 1, 4, 2, 0), bounds),))
        assert enumerate_paths(a, a.regions[0]) == enumerate_paths(b, b.regions[0])

    def test_canonicalization(self):
        assert make_path(7, 2) == make_path(2, 7)
        with pytest.raises(ConfigError):
            make_path(3, 3)

    def test_too_few_sensors_rejected(self):
        with pytest.raises(ConfigError):
            Region(0, (1,), Rect(0, 0, 1, 1))


class TestLayoutValidation:
    def test_duplicate_sensor_ids(self):
        with pytest.raises(ConfigError):
            SensorLayout((Sensor(1, 0, 0), Sensor(1, 5, 5)))

    def test_region_references_unknown_sensor(self):
        with pytest.raises(ConfigError):
            SensorLayout((Sensor(0, 0, 0), Sensor(1, 5, 5)),
                         (Region(0, (0, 99), Rect(0, 0, 10, 10)),))

    def test_region_bounds_must_contain_sensors(self):
        with pytest.raises(ConfigError):
            SensorLayout((Sensor(0, 0, 0), Sensor(1, 50, 50)),
                         (Region(0, (0, 1), Rect(0, 0, 10, 10)),))

    def test_non_finite_sensor(self):
        with pytest.raises(ConfigError):
            Sensor(0, float("inf"), 0.0)


class TestGWSignal:
    def test_requires_samples(self):
        with pytest.raises(DataError):
            GWSignal(make_path(0, 1), 0, np.array([]), 1e6)

    def test_requires_positive_rate(self):
        with pytest.raises(DataError):
            GWSignal(make_path(0, 1), 0, np.ones(4), 0.0)

    def test_normalized_copy(self):
        sig = GWSignal(make_path(0, 1), 2, np.array([2.0, 4.0]), 1e6)
        out = sig.normalized()
        assert out.samples.tolist() == [0.0, 1.0]
        assert sig.samples.tolist() == [2.0, 4.0]
        assert out.path == sig.path and out.repetition == 2
