"""Training loop: minibatch Adam on pristine signals.

All randomness (train/validation split, per-epoch shuffling) flows from the
single seed in TrainConfig, so two runs on identical data produce identical
models and loss histories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autoencoder import KAEModel
from .errors import ConfigError, DataError, TrainingError
from .signals import GWSignal

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 16
    epochs: int = 100
    weight_decay: float = 1e-6
    gamma: float = 0.95
    seed: int = 0
    split_fraction: float = 0.8
    reduction: str = "mean"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.split_fraction < 1:
            raise ConfigError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.batch_size < 1 or self.epochs < 0 or self.weight_decay < 0:
            raise ConfigError("batch_size >= 1, epochs >= 0, weight_decay >= 0 required")
        if self.reduction not in ("mean", "sum"):
            raise ConfigError(f"unknown reduction {self.reduction!r}")


@dataclass
class LossHistory:
    """Per-epoch mean reconstruction error on the train and validation splits."""

    train: list[float] = field(default_factory=list)
    val: list[float] = field(default_factory=list)


class AdamState:
    """First/second-moment accumulators mirroring the parameter shapes."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, cfg: TrainConfig, epoch: int = 0) -> tuple[dict, AdamState]:
    """One bias-corrected Adam update, in place.

    Weight decay is decoupled: p <- p - lr*wd*p before the Adam delta. The
    effective learning rate decays as learning_rate * gamma**epoch.
    """
    lr = cfg.learning_rate * cfg.gamma**epoch
    state.t += 1
    t = state.t
    m_scale = lr / (1 - ADAM_BETA1**t)
    v_scale = 1 - ADAM_BETA2**t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise TrainingError(f"gradient shape mismatch for {name}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in parameter block {name}")
        if cfg.weight_decay:
            p *= 1.0 - lr * cfg.weight_decay
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1 - ADAM_BETA2) * g * g
        denom = np.sqrt(v / v_scale)
        denom += ADAM_EPS
        p -= m_scale * m / denom
    return params, state


def reconstruction_gradients(model: KAEModel, batch: np.ndarray,
                             reduction: str = "mean") -> tuple[float, dict[str, np.ndarray]]:
    """Mean batch loss and its gradient for every model parameter.

    The batch objective is the mean over rows of the per-signal reconstruction
    error, matching what the training loop minimizes.
    """
    x = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    n = x.shape[0]
    layers = model.layers()

    inputs = []
    caches = []
    out = x
    for layer in layers:
        pair = layer.grid.basis_and_deriv(out)
        inputs.append(out)
        caches.append(pair)
        out = layer._forward_from_basis(out, pair[0])

    per_signal = np.sum((out - x) ** 2, axis=1)
    if reduction == "mean":
        per_signal = per_signal / model.m
    batch_loss = float(per_signal.mean())

    g = 2.0 * (out - x) / n
    if reduction == "mean":
        g = g / model.m
    grads: dict[str, np.ndarray] = {}
    tags = [f"enc{i}" for i in range(len(model.encoder))]
    tags += [f"dec{i}" for i in range(len(model.decoder))]
    for depth, (layer, layer_in, pair, tag) in enumerate(
        zip(reversed(layers), reversed(inputs), reversed(caches), reversed(tags))
    ):
        g, layer_grads = layer.backward(layer_in, g, basis_pair=pair,
                                        need_input_grad=depth < len(layers) - 1)
        grads[f"{tag}.coeffs"] = layer_grads.coeffs
        grads[f"{tag}.w_base"] = layer_grads.w_base
        grads[f"{tag}.w_spline"] = layer_grads.w_spline
    return batch_loss, grads


def split_groups(signals: list[GWSignal], fraction: float,
                 rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Indices of train/validation signals, split by repetition.

    Signals sharing a repetition index stay on one side of the split (a
    measurement is held out whole). When all signals carry the same
    repetition the split falls back to individual indices.
    """
    reps = sorted({s.repetition for s in signals})
    if len(reps) >= 2:
        order = [reps[i] for i in rng.permutation(len(reps))]
        n_train = min(max(int(len(order) * fraction), 1), len(order) - 1)
        train_reps = set(order[:n_train])
        train_idx = [i for i, s in enumerate(signals) if s.repetition in train_reps]
        val_idx = [i for i, s in enumerate(signals) if s.repetition not in train_reps]
    else:
        order = rng.permutation(len(signals))
        n_train = min(max(int(len(signals) * fraction), 1), len(signals) - 1)
        train_idx = sorted(order[:n_train].tolist())
        val_idx = sorted(order[n_train:].tolist())
    return train_idx, val_idx


def dataset_loss(model: KAEModel, x: np.ndarray, reduction: str = "mean",
                 chunk: int = 256) -> float:
    """Mean per-signal reconstruction error over the rows of x."""
    total = 0.0
    for start in range(0, x.shape[0], chunk):
        xb = x[start : start + chunk]
        per_signal = np.sum((model.reconstruct(xb) - xb) ** 2, axis=1)
        if reduction == "mean":
            per_signal = per_signal / x.shape[1]
        total += float(per_signal.sum())
    return total / x.shape[0]


def _stack(signals: list[GWSignal], m: int) -> np.ndarray:
    rows = []
    for s in signals:
        if len(s) != m:
            raise DataError(f"signal width {len(s)} != model width {m}")
        rows.append(s.samples)
    x = np.stack(rows)
    if x.min() < -1e-12 or x.max() > 1 + 1e-12:
        raise DataError("training signals must be normalized to [0, 1]")
    return x


def train(model: KAEModel, baselines: list[GWSignal],
          cfg: TrainConfig) -> tuple[KAEModel, LossHistory]:
    """Fit the autoencoder to pristine signals; returns per-epoch losses."""
    if len(baselines) < 2:
        raise DataError(f"need at least 2 baseline signals, got {len(baselines)}")
    rng = np.random.default_rng(cfg.seed)
    train_idx, val_idx = split_groups(baselines, cfg.split_fraction, rng)
    x_all = _stack(baselines, model.m)
    x_train = x_all[train_idx]
    x_val = x_all[val_idx]

    history = LossHistory()
    params = model.parameters()
    state = AdamState(params)
    n = x_train.shape[0]
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch_idx = perm[start : start + cfg.batch_size]
            batch_loss, grads = reconstruction_gradients(model, x_train[batch_idx], cfg.reduction)
            epoch_loss += batch_loss * len(batch_idx)
            adam_step(params, grads, state, cfg, epoch)
        train_loss = epoch_loss / n
        val_loss = dataset_loss(model, x_val, cfg.reduction)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise TrainingError(f"training diverged at epoch {epoch}: loss is not finite")
        history.train.append(train_loss)
        history.val.append(val_loss)
    return model, history
