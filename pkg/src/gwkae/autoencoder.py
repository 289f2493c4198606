"""The KAN autoencoder: stacked encoder/decoder layers and JSON persistence.

The encoder compresses a width-m waveform down to a low-dimensional latent
vector; the decoder expands it back. The reconstruction is the "virtual
baseline" against which incoming signals are scored.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, PersistenceError, ShapeError
from .kan import BSplineGrid, KANLayer

MODEL_FORMAT_VERSION = 1

DEFAULT_HIDDEN = (512, 256)
DEFAULT_BOTTLENECK = 8


def default_widths(m: int, hidden: Sequence[int] = DEFAULT_HIDDEN,
                   bottleneck: int = DEFAULT_BOTTLENECK) -> list[int]:
    """Symmetric width chain [m, *hidden, bottleneck, *reversed(hidden), m]."""
    hidden = list(hidden)
    return [m] + hidden + [bottleneck] + hidden[::-1] + [m]


class KAEModel:
    """Encoder/decoder stacks of KAN layers with a shared spline grid."""

    def __init__(self, encoder: list[KANLayer], decoder: list[KANLayer]):
        if not encoder or not decoder:
            raise ConfigError("model needs at least one encoder and one decoder layer")
        chain = encoder + decoder
        for a, b in zip(chain, chain[1:]):
            if a.out_dim != b.in_dim:
                raise ConfigError(f"layer widths do not chain: {a.out_dim} -> {b.in_dim}")
        if decoder[-1].out_dim != encoder[0].in_dim:
            raise ConfigError("decoder output width must equal encoder input width")
        self.encoder = list(encoder)
        self.decoder = list(decoder)

    @classmethod
    def create(cls, widths: Sequence[int], grid: BSplineGrid | None = None,
               seed: int = 0) -> "KAEModel":
        """Build a fresh model from a full width chain.

        `widths` runs input -> bottleneck -> output, e.g. [6000, 512, 256, 8,
        256, 512, 6000]; it must have odd length with the bottleneck in the
        middle and equal end widths.
        """
        widths = [int(w) for w in widths]
        if len(widths) < 3 or len(widths) % 2 == 0:
            raise ConfigError(f"width chain must have odd length >= 3, got {widths}")
        if widths[0] != widths[-1]:
            raise ConfigError(f"input and output widths differ: {widths[0]} != {widths[-1]}")
        if any(w < 1 for w in widths):
            raise ConfigError(f"widths must be positive, got {widths}")
        grid = grid or BSplineGrid()
        mid = len(widths) // 2
        rng = np.random.default_rng(seed)
        encoder = [KANLayer.initialize(widths[i], widths[i + 1], grid, rng) for i in range(mid)]
        decoder = [KANLayer.initialize(widths[i], widths[i + 1], grid, rng) for i in range(mid, len(widths) - 1)]
        return cls(encoder, decoder)

    @property
    def m(self) -> int:
        """Input (and reconstruction) width."""
        return self.encoder[0].in_dim

    @property
    def bottleneck(self) -> int:
        return self.encoder[-1].out_dim

    @property
    def widths(self) -> list[int]:
        return [self.encoder[0].in_dim] + [layer.out_dim for layer in self.encoder + self.decoder]

    @property
    def grid(self) -> BSplineGrid:
        return self.encoder[0].grid

    def layers(self) -> list[KANLayer]:
        return self.encoder + self.decoder

    def encode(self, x) -> np.ndarray:
        """Compress a width-m vector (or batch) to the bottleneck."""
        out = np.asarray(x, dtype=np.float64)
        if out.shape[-1] != self.m:
            raise ShapeError(f"input width {out.shape[-1]} != model width {self.m}")
        for layer in self.encoder:
            out = layer.forward(out)
        return out

    def decode(self, s) -> np.ndarray:
        """Expand a bottleneck vector (or batch) back to width m."""
        out = np.asarray(s, dtype=np.float64)
        if out.shape[-1] != self.bottleneck:
            raise ShapeError(f"latent width {out.shape[-1]} != bottleneck {self.bottleneck}")
        for layer in self.decoder:
            out = layer.forward(out)
        return out

    def reconstruct(self, x) -> np.ndarray:
        """The virtual baseline for x: decode(encode(x))."""
        return self.decode(self.encode(x))

    def parameters(self) -> dict[str, np.ndarray]:
        """Named views of every trainable array (mutating them mutates the model)."""
        params: dict[str, np.ndarray] = {}
        for tag, stack in (("enc", self.encoder), ("dec", self.decoder)):
            for idx, layer in enumerate(stack):
                params[f"{tag}{idx}.coeffs"] = layer.coeffs
                params[f"{tag}{idx}.w_base"] = layer.w_base
                params[f"{tag}{idx}.w_spline"] = layer.w_spline
        return params


def loss(x, x_rec, reduction: str = "mean") -> float:
    """Squared reconstruction error, averaged over samples or summed raw."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(x_rec, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"loss operands differ in shape: {a.shape} vs {b.shape}")
    total = float(np.sum((a - b) ** 2))
    if reduction == "mean":
        return total / a.shape[-1]
    if reduction == "sum":
        return total
    raise ConfigError(f"unknown loss reduction {reduction!r}")


def save_model(model: KAEModel, path) -> None:
    """Persist every parameter to JSON; floats round-trip bit-exactly."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "widths": model.widths,
        "n_encoder_layers": len(model.encoder),
        "grid": {
            "order": model.grid.order,
            "intervals": model.grid.intervals,
            "lo": model.grid.lo,
            "hi": model.grid.hi,
        },
        "layers": [
            {
                "coeffs": layer.coeffs.tolist(),
                "w_base": layer.w_base.tolist(),
                "w_spline": layer.w_spline.tolist(),
            }
            for layer in model.layers()
        ],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path) -> KAEModel:
    path = Path(path)
    if not path.exists():
        raise PersistenceError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"{path}: corrupt model file ({exc})") from None
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise PersistenceError(
            f"{path}: format_version {version} not supported (expected {MODEL_FORMAT_VERSION})"
        )
    try:
        grid = BSplineGrid(
            order=int(doc["grid"]["order"]),
            intervals=int(doc["grid"]["intervals"]),
            lo=float(doc["grid"]["lo"]),
            hi=float(doc["grid"]["hi"]),
        )
        widths = [int(w) for w in doc["widths"]]
        n_enc = int(doc["n_encoder_layers"])
        layers = []
        for i, entry in enumerate(doc["layers"]):
            layers.append(
                KANLayer(
                    widths[i],
                    widths[i + 1],
                    grid,
                    np.asarray(entry["coeffs"], dtype=np.float64),
                    np.asarray(entry["w_base"], dtype=np.float64),
                    np.asarray(entry["w_spline"], dtype=np.float64),
                )
            )
    except (KeyError, TypeError, ValueError, ShapeError) as exc:
        raise PersistenceError(f"{path}: malformed model file ({exc})") from None
    if len(layers) != len(widths) - 1 or not 0 < n_enc < len(layers):
        raise PersistenceError(f"{path}: layer list inconsistent with widths")
    return KAEModel(layers[:n_enc], layers[n_enc:])
