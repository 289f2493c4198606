"""Kolmogorov-Arnold layer mathematics.

Every network edge carries a learnable univariate function

    phi(x) = w_base * silu(x) + w_spline * sum_m c_m B_m(x)

where the B_m are uniform B-spline basis functions of degree `order` over
`intervals` interior knot spans. A layer output coordinate is the sum of its
row's edge activations; there are no scalar weight matrices or biases.

Forward and backward passes are pure given a parameter snapshot. The training
loop is the only writer of layer parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError


def silu(x):
    """x * sigmoid(x), the base nonlinearity underneath every edge spline."""
    return x / (1.0 + np.exp(-x))


def silu_grad(x):
    s = 1.0 / (1.0 + np.exp(-x))
    return s * (1.0 + x * (1.0 - s))


@dataclass(frozen=True)
class BSplineGrid:
    """Uniform knot grid shared by all edges of a layer.

    The knot sequence extends `order` spans beyond each end of [lo, hi] so
    that exactly intervals + order basis functions are active on the domain.
    Evaluations outside [lo, hi] extrapolate each basis function linearly from
    the boundary, which keeps activations and gradients defined when hidden
    activations drift out of range.
    """

    order: int = 3
    intervals: int = 5
    lo: float = -1.0
    hi: float = 2.0

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError(f"spline order must be >= 1, got {self.order}")
        if self.intervals < 1:
            raise ConfigError(f"grid needs >= 1 interior interval, got {self.intervals}")
        if not self.lo < self.hi:
            raise ConfigError(f"grid domain is empty: [{self.lo}, {self.hi}]")

    @property
    def n_basis(self) -> int:
        return self.intervals + self.order

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.intervals

    def knots(self) -> np.ndarray:
        k, g = self.order, self.intervals
        return self.lo + (np.arange(g + 2 * k + 1) - k) * self.step

    def basis_and_deriv(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Cox-de Boor basis values and first derivatives, appended as a last axis.

        Input may have any shape; the result gains a trailing axis of length
        n_basis. Out-of-domain points are evaluated by linear extrapolation,
        so the returned derivative is the boundary derivative there.
        """
        x = np.asarray(x, dtype=np.float64)
        k = self.order
        t = self.knots()
        xc = np.clip(x, self.lo, self.hi)
        u = xc[..., None]

        # degree-0 indicators of the half-open knot spans
        b = ((u >= t[:-1]) & (u < t[1:])).astype(np.float64)
        prev = b
        for j in range(1, k + 1):
            npts = len(t) - j  # count of degree-(j-1) functions entering this step
            prev = b
            left = (u - t[: npts - 1]) / (t[j : j + npts - 1] - t[: npts - 1])
            right = (t[j + 1 : j + npts] - u) / (t[j + 1 : j + npts] - t[1:npts])
            b = left * b[..., : npts - 1] + right * b[..., 1:npts]

        # derivative of the degree-k basis from the degree-(k-1) basis
        lp = len(t) - k  # count of degree-(k-1) functions
        den_lo = t[k : k + lp - 1] - t[: lp - 1]
        den_hi = t[k + 1 : k + lp] - t[1:lp]
        d = k * (prev[..., : lp - 1] / den_lo - prev[..., 1:lp] / den_hi)

        # linear tail: B(x) = B(x_clip) + B'(x_clip) * (x - x_clip)
        shift = (x - xc)[..., None]
        return b + d * shift, d


def bspline_basis(x: float, grid: BSplineGrid) -> np.ndarray:
    """Basis-function values at a scalar point, length intervals + order."""
    values, _ = grid.basis_and_deriv(np.float64(x))
    return values


@dataclass
class KANEdge:
    """Parameters of one edge's learnable activation."""

    spline_coeffs: np.ndarray
    w_base: float
    w_spline: float


def edge_activation(x: float, edge: KANEdge, grid: BSplineGrid) -> float:
    """Evaluate one edge: silu base term plus the spline expansion."""
    coeffs = np.asarray(edge.spline_coeffs, dtype=np.float64)
    if coeffs.shape != (grid.n_basis,):
        raise ShapeError(f"edge has {coeffs.shape[0]} coefficients, grid expects {grid.n_basis}")
    return float(edge.w_base * silu(x) + edge.w_spline * (coeffs @ bspline_basis(x, grid)))


@dataclass
class LayerGrads:
    """Gradients for every parameter block of one layer."""

    coeffs: np.ndarray
    w_base: np.ndarray
    w_spline: np.ndarray


class KANLayer:
    """A dense layer of learnable edge activations.

    Parameters are stored as arrays over (out_dim, in_dim) edges:
    `coeffs[j, i]` are the spline coefficients of edge i -> j.
    """

    def __init__(self, in_dim: int, out_dim: int, grid: BSplineGrid,
                 coeffs: np.ndarray, w_base: np.ndarray, w_spline: np.ndarray):
        if coeffs.shape != (out_dim, in_dim, grid.n_basis):
            raise ShapeError(f"coeffs shape {coeffs.shape} != {(out_dim, in_dim, grid.n_basis)}")
        if w_base.shape != (out_dim, in_dim) or w_spline.shape != (out_dim, in_dim):
            raise ShapeError("edge weight arrays must be (out_dim, in_dim)")
        for arr in (coeffs, w_base, w_spline):
            if not np.all(np.isfinite(arr)):
                raise ConfigError("layer parameters must be finite")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.grid = grid
        self.coeffs = np.array(coeffs, dtype=np.float64)
        self.w_base = np.array(w_base, dtype=np.float64)
        self.w_spline = np.array(w_spline, dtype=np.float64)

    @classmethod
    def initialize(cls, in_dim: int, out_dim: int, grid: BSplineGrid,
                   rng: np.random.Generator) -> "KANLayer":
        """Fresh layer: small random spline coefficients, unit spline gain,
        fan-in-scaled uniform base weight."""
        coeffs = rng.normal(0.0, 0.1, size=(out_dim, in_dim, grid.n_basis))
        bound = 1.0 / np.sqrt(in_dim)
        w_base = rng.uniform(-bound, bound, size=(out_dim, in_dim))
        w_spline = np.ones((out_dim, in_dim))
        return cls(in_dim, out_dim, grid, coeffs, w_base, w_spline)

    def edge(self, out_idx: int, in_idx: int) -> KANEdge:
        return KANEdge(
            spline_coeffs=self.coeffs[out_idx, in_idx].copy(),
            w_base=float(self.w_base[out_idx, in_idx]),
            w_spline=float(self.w_spline[out_idx, in_idx]),
        )

    def _check_input(self, x) -> tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.in_dim:
            raise ShapeError(f"input width {arr.shape[-1]} != layer in_dim {self.in_dim}")
        return arr, single

    def forward(self, x) -> np.ndarray:
        """Apply the layer to a vector or a (batch, in_dim) array."""
        arr, single = self._check_input(x)
        y = self._forward_from_basis(arr, self.grid.basis_and_deriv(arr)[0])
        return y[0] if single else y

    def _forward_from_basis(self, arr: np.ndarray, basis: np.ndarray) -> np.ndarray:
        n = arr.shape[0]
        spline_w = (self.w_spline[..., None] * self.coeffs).reshape(self.out_dim, -1)
        return silu(arr) @ self.w_base.T + basis.reshape(n, -1) @ spline_w.T

    def backward(self, x, upstream, *, basis_pair=None,
                 need_input_grad: bool = True) -> tuple[np.ndarray | None, LayerGrads]:
        """Exact partials of the forward map, contracted with `upstream`.

        Returns the gradient with respect to the input plus gradients for all
        three parameter blocks. `basis_pair` re-uses basis values cached by a
        prior forward pass; when absent they are recomputed. The input
        gradient is skipped (None) when `need_input_grad` is false, which the
        training loop uses for the first layer.
        """
        arr, single = self._check_input(x)
        g = np.asarray(upstream, dtype=np.float64)
        if single:
            g = g[None, :]
        if g.shape != (arr.shape[0], self.out_dim):
            raise ShapeError(f"upstream shape {g.shape} != {(arr.shape[0], self.out_dim)}")

        basis, dbasis = basis_pair if basis_pair is not None else self.grid.basis_and_deriv(arr)
        n, nb = arr.shape[0], self.grid.n_basis

        moments = (g.T @ basis.reshape(n, -1)).reshape(self.out_dim, self.in_dim, nb)
        grads = LayerGrads(
            coeffs=self.w_spline[..., None] * moments,
            w_base=g.T @ silu(arr),
            w_spline=np.einsum("oim,oim->oi", moments, self.coeffs),
        )
        if not need_input_grad:
            return None, grads
        spline_w = (self.w_spline[..., None] * self.coeffs).reshape(self.out_dim, -1)
        pullback = (g @ spline_w).reshape(n, self.in_dim, nb)
        grad_x = silu_grad(arr) * (g @ self.w_base) + np.sum(pullback * dbasis, axis=-1)
        return (grad_x[0] if single else grad_x), grads


def layer_forward(layer: KANLayer, x) -> np.ndarray:
    return layer.forward(x)


def layer_backward(layer: KANLayer, x, upstream) -> tuple[np.ndarray, LayerGrads]:
    return layer.backward(x, upstream)
