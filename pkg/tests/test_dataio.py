import numpy as np
import pytest

from gwkae.dataio import load_dataset, load_layout, load_truth, save_dataset, save_layout, save_truth
from gwkae.errors import DataError
from gwkae.signals import GWSignal, Rect, Region, Sensor, SensorLayout, make_path


@pytest.fixture
def layout():
    sensors = (Sensor(0, 0, 0), Sensor(1, 100, 0), Sensor(2, 0, 100))
    return SensorLayout(sensors, (Region(0, (0, 1, 2), Rect(-1, -1, 101, 101)),))


def random_signals(n, m, rng):
    out = []
    for i in range(n):
        out.append(GWSignal(make_path(0, 1 + i % 2), i, rng.normal(size=m), 2e6))
    return out


def test_roundtrip_is_bit_exact(tmp_path, layout):
    rng = np.random.default_rng(11)
    signals = random_signals(5, 40, rng)
    # include awkward values that expose lossy decimal formatting
    doctored = np.array(signals[0].samples)
    doctored[0] = 1 / 3
    doctored[1] = 1e-17
    doctored[2] = -0.1
    signals[0] = GWSignal(signals[0].path, 0, doctored, 2e6)
    save_dataset(tmp_path / "d.csv", signals)
    back = load_dataset(tmp_path / "d.csv", layout, 2e6)
    assert len(back) == 5
    for a, b in zip(signals, back):
        assert a.path == b.path and a.repetition == b.repetition
        assert np.array_equal(a.samples, b.samples)


def test_row_count_preserved(tmp_path, layout):
    signals = random_signals(3, 8, np.random.default_rng(0))
    save_dataset(tmp_path / "d.csv", signals)
    assert len(load_dataset(tmp_path / "d.csv", layout, 1e6)) == 3


def test_unknown_sensor_id_named(tmp_path, layout):
    (tmp_path / "d.csv").write_text("actuator_id,sensor_id,repetition,s0,s1\n0,999,0,0.1,0.2\n")
    with pytest.raises(DataError, match="999"):
        load_dataset(tmp_path / "d.csv", layout)


def test_ragged_row_reports_row_index(tmp_path, layout):
    (tmp_path / "d.csv").write_text(
        "actuator_id,sensor_id,repetition,s0,s1\n0,1,0,0.1,0.2\n0,2,0,0.3\n"
    )
    with pytest.raises(DataError, match="row 3"):
        load_dataset(tmp_path / "d.csv", layout)


def test_non_numeric_cell(tmp_path, layout):
    (tmp_path / "d.csv").write_text("actuator_id,sensor_id,repetition,s0\n0,1,0,abc\n")
    with pytest.raises(DataError, match="row 2"):
        load_dataset(tmp_path / "d.csv", layout)


def test_missing_header(tmp_path, layout):
    (tmp_path / "d.csv").write_text("0,1,0,0.5\n")
    with pytest.raises(DataError, match="header"):
        load_dataset(tmp_path / "d.csv", layout)


def test_missing_file(tmp_path, layout):
    with pytest.raises(DataError, match="not found"):
        load_dataset(tmp_path / "nope.csv", layout)


def test_layout_roundtrip(tmp_path, layout):
    save_layout(tmp_path / "layout.json", layout)
    back = load_layout(tmp_path / "layout.json")
    assert back == layout


def test_layout_malformed(tmp_path):
    (tmp_path / "layout.json").write_text('{"sensors": [{"id": 1}]}')
    with pytest.raises(DataError):
        load_layout(tmp_path / "layout.json")


def test_truth_roundtrip(tmp_path):
    damages = [{"x_mm": 70.0, "y_mm": 90.0, "diameter_mm": 25.0}]
    save_truth(tmp_path / "truth.json", damages)
    assert load_truth(tmp_path / "truth.json") == damages
