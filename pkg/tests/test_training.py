import numpy as np
import pytest

from gwkae.autoencoder import KAEModel, loss
from gwkae.errors import ConfigError, DataError, TrainingError
from gwkae.kan import BSplineGrid
from gwkae.signals import GWSignal, make_path
from gwkae.training import (AdamState, LossHistory, TrainConfig, adam_step,
                            reconstruction_gradients, split_groups, train)


def signals_from_rows(rows, reps=None):
    reps = reps if reps is not None else range(len(rows))
    return [GWSignal(make_path(0, 1), r, row, 1e6) for r, row in zip(reps, rows)]


class TestConfig:
    def test_defaults_match_reference_optimizer_settings(self):
        cfg = TrainConfig()
        assert (cfg.learning_rate, cfg.batch_size, cfg.epochs) == (0.001, 16, 100)
        assert cfg.weight_decay == 1e-6 and cfg.gamma == 0.95
        assert cfg.split_fraction == 0.8

    def test_validation(self):
        with pytest.raises(ConfigError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(split_fraction=1.0)
        with pytest.raises(ConfigError):
            TrainConfig(gamma=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(reduction="max")


class TestAdam:
    def test_zero_gradient_no_decay_leaves_parameters(self):
        p = {"w": np.array([1.0, -2.0])}
        state = AdamState(p)
        adam_step(p, {"w": np.zeros(2)}, state, TrainConfig(weight_decay=0.0))
        assert p["w"].tolist() == [1.0, -2.0]

    def test_zero_gradient_with_decay_shrinks_by_exact_factor(self):
        cfg = TrainConfig(learning_rate=0.01, weight_decay=0.5)
        p = {"w": np.array([1.0, -2.0, 0.25])}
        state = AdamState(p)
        adam_step(p, {"w": np.zeros(3)}, state, cfg)
        factor = 1.0 - cfg.learning_rate * cfg.weight_decay
        assert p["w"].tolist() == [1.0 * factor, -2.0 * factor, 0.25 * factor]

    def test_first_step_with_unit_gradient(self):
        # hand-evaluated recurrence: m_hat = v_hat = 1 after one step
        p = {"w": np.array([0.0])}
        state = AdamState(p)
        adam_step(p, {"w": np.array([1.0])}, state, TrainConfig(weight_decay=0.0))
        assert p["w"][0] == pytest.approx(-0.001, rel=1e-6)

    def test_learning_rate_decays_with_epoch(self):
        cfg = TrainConfig(weight_decay=0.0)
        for epoch in (0, 3, 7):
            p = {"w": np.array([0.0])}
            adam_step(p, {"w": np.array([1.0])}, AdamState(p), cfg, epoch=epoch)
            assert p["w"][0] == pytest.approx(-0.001 * 0.95**epoch, rel=1e-6)

    def test_non_finite_gradient_names_block(self):
        p = {"enc0.coeffs": np.array([0.0])}
        with pytest.raises(TrainingError, match="enc0.coeffs"):
            adam_step(p, {"enc0.coeffs": np.array([np.nan])}, AdamState(p), TrainConfig())


class TestSplit:
    def test_eighty_twenty_over_43_measurements(self):
        signals = signals_from_rows(np.zeros((43, 4)) + 0.5)
        train_idx, val_idx = split_groups(signals, 0.8, np.random.default_rng(0))
        assert len(train_idx) == 34 and len(val_idx) == 9

    def test_measurements_stay_whole(self):
        # two paths per repetition: both signals of a repetition land on one side
        rows = np.full((20, 4), 0.5)
        signals = []
        for rep in range(10):
            signals.append(GWSignal(make_path(0, 1), rep, rows[2 * rep], 1e6))
            signals.append(GWSignal(make_path(0, 2), rep, rows[2 * rep + 1], 1e6))
        train_idx, val_idx = split_groups(signals, 0.8, np.random.default_rng(1))
        train_reps = {signals[i].repetition for i in train_idx}
        val_reps = {signals[i].repetition for i in val_idx}
        assert not (train_reps & val_reps)
        assert len(train_idx) == 16 and len(val_idx) == 4

    def test_deterministic_given_seed(self):
        signals = signals_from_rows(np.full((12, 3), 0.25))
        a = split_groups(signals, 0.8, np.random.default_rng(7))
        b = split_groups(signals, 0.8, np.random.default_rng(7))
        assert a == b


class TestTrain:
    def make_dataset(self, n=10, m=12, seed=0):
        rng = np.random.default_rng(seed)
        base = rng.uniform(0.2, 0.8, m)
        rows = np.clip(base + rng.normal(0, 0.02, size=(n, m)), 0, 1)
        return signals_from_rows(rows)

    def test_zero_epochs_is_identity(self):
        model = KAEModel.create((12, 6, 4, 6, 12), BSplineGrid(), seed=0)
        before = {k: v.copy() for k, v in model.parameters().items()}
        model, history = train(model, self.make_dataset(), TrainConfig(epochs=0))
        assert history.train == [] and history.val == []
        for k, v in model.parameters().items():
            assert np.array_equal(v, before[k])

    def test_reproducible_given_seed(self):
        cfg = TrainConfig(epochs=3, batch_size=4, seed=11)
        runs = []
        for _ in range(2):
            model = KAEModel.create((12, 6, 4, 6, 12), BSplineGrid(), seed=2)
            model, history = train(model, self.make_dataset(), cfg)
            runs.append((history, {k: v.copy() for k, v in model.parameters().items()}))
        assert runs[0][0] == runs[1][0]
        for k in runs[0][1]:
            assert np.array_equal(runs[0][1][k], runs[1][1][k])

    def test_identical_signals_converge(self):
        # width-64 toy network memorizing a single waveform
        rng = np.random.default_rng(3)
        row = np.clip(0.5 + 0.3 * np.sin(np.linspace(0, 8 * np.pi, 64)) + rng.normal(0, 0.01, 64), 0, 1)
        signals = signals_from_rows(np.tile(row, (40, 1)))
        model = KAEModel.create((64, 16, 8, 16, 64), BSplineGrid(), seed=4)
        cfg = TrainConfig(epochs=120, batch_size=16, learning_rate=0.01, gamma=0.99,
                          weight_decay=0.0, seed=4)
        model, history = train(model, signals, cfg)
        assert history.train[-1] < 1e-5
        assert len(history.train) == len(history.val) == 120

    def test_validation_loss_drops_on_identical_signals(self):
        row = np.full(16, 0.4)
        signals = signals_from_rows(np.tile(row, (12, 1)))
        model = KAEModel.create((16, 8, 4, 8, 16), BSplineGrid(), seed=1)
        _, history = train(model, signals, TrainConfig(epochs=40, batch_size=4,
                                                       learning_rate=0.01, weight_decay=0.0))
        smoothed = np.convolve(history.val, np.ones(5) / 5, mode="valid")
        assert all(b <= a + 1e-12 for a, b in zip(smoothed, smoothed[1:]))
        assert history.val[-1] < history.val[0]

    def test_rejects_bad_datasets(self):
        model = KAEModel.create((12, 6, 4, 6, 12), BSplineGrid(), seed=0)
        with pytest.raises(DataError):
            train(model, [], TrainConfig(epochs=1))
        bad_width = signals_from_rows(np.full((4, 7), 0.5))
        with pytest.raises(DataError):
            train(model, bad_width, TrainConfig(epochs=1))
        unnormalized = signals_from_rows(np.full((4, 12), 1.5))
        with pytest.raises(DataError):
            train(model, unnormalized, TrainConfig(epochs=1))


class TestFullModelGradients:
    def test_reconstruction_gradients_match_finite_differences(self):
        model = KAEModel.create((8, 4, 2, 4, 8), BSplineGrid(), seed=6)
        rng = np.random.default_rng(6)
        batch = rng.uniform(0, 1, size=(3, 8))
        _, grads = reconstruction_gradients(model, batch, "mean")
        params = model.parameters()
        h = 1e-5
        checked = 0
        for name, arr in params.items():
            flat = arr.reshape(-1)
            for idx in rng.choice(flat.size, size=min(6, flat.size), replace=False):
                orig = flat[idx]
                flat[idx] = orig + h
                hi_val = np.mean([loss(x, model.reconstruct(x)) for x in batch])
                flat[idx] = orig - h
                lo_val = np.mean([loss(x, model.reconstruct(x)) for x in batch])
                flat[idx] = orig
                fd = (hi_val - lo_val) / (2 * h)
                g = grads[name].reshape(-1)[idx]
                assert abs(g - fd) <= 1e-4 * max(abs(g), abs(fd), 1e-7)
                checked += 1
        assert checked > 30
