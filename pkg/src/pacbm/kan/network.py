"""Spline-edge network: every edge is a learnable univariate function.

An edge computes phi(x) = w_b * x*sigmoid(x) + w_s * sum_i c_i B_i(x);
a layer sums incoming edge values per output node, and a network chains
layers. Forward passes cache basis values so the backward pass can emit
analytic gradients for every coefficient, both edge weights, and the
layer inputs.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .bspline import BSplineGrid, bspline_basis, bspline_basis_and_derivative

COEF_INIT_SCALE = 0.1  # coef std = COEF_INIT_SCALE / sqrt(n_basis)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(x: np.ndarray) -> np.ndarray:
    return x * sigmoid(x)


def silu_grad(x: np.ndarray) -> np.ndarray:
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


@dataclasses.dataclass
class KanEdge:
    """One learnable univariate edge function."""

    coef: np.ndarray  # (n_basis,)
    w_b: float
    w_s: float


def edge_eval(x, edge: KanEdge, grid: BSplineGrid):
    """phi(x) for a single edge; accepts scalars or arrays.

    The base activation runs on the raw input; only the spline component
    sees the grid-clamped value (it is flat beyond the grid).
    """
    x = np.asarray(x, dtype=np.float64)
    b = bspline_basis(x, grid)
    out = edge.w_b * silu(x) + edge.w_s * (b @ np.asarray(edge.coef, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


class KanLayer:
    """n_out x n_in grid of spline edges sharing one basis grid."""

    def __init__(self, n_in: int, n_out: int, grid: BSplineGrid,
                 coef: np.ndarray, w_b: np.ndarray, w_s: np.ndarray):
        coef = np.asarray(coef, dtype=np.float64)
        w_b = np.asarray(w_b, dtype=np.float64)
        w_s = np.asarray(w_s, dtype=np.float64)
        if coef.shape != (n_out, n_in, grid.n_basis):
            raise ValueError(f"coef shape {coef.shape} != {(n_out, n_in, grid.n_basis)}")
        if w_b.shape != (n_out, n_in) or w_s.shape != (n_out, n_in):
            raise ValueError("edge weight shapes must be (n_out, n_in)")
        self.n_in = n_in
        self.n_out = n_out
        self.grid = grid
        self.coef = coef
        self.w_b = w_b
        self.w_s = w_s

    def edge(self, q: int, p: int) -> KanEdge:
        return KanEdge(coef=self.coef[q, p], w_b=float(self.w_b[q, p]), w_s=float(self.w_s[q, p]))

    def parameters(self) -> list[np.ndarray]:
        return [self.coef, self.w_b, self.w_s]

    def forward(self, x: np.ndarray, *, cache: bool = False):
        """x (N, n_in) -> (N, n_out); optionally returns a backward cache."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"expected input (N, {self.n_in}), got {x.shape}")
        if cache:
            basis, dbasis = bspline_basis_and_derivative(x, self.grid)
        else:
            basis, dbasis = bspline_basis(x, self.grid), None
        sb = silu(x)
        spline = np.einsum("npb,qpb->nqp", basis, self.coef)
        y = sb @ self.w_b.T + np.einsum("nqp,qp->nq", spline, self.w_s)
        if not cache:
            return y
        inside = (x >= self.grid.lo) & (x <= self.grid.hi)
        return y, {"x": x, "basis": basis, "dbasis": dbasis, "sb": sb,
                   "spline": spline, "inside": inside}

    def backward(self, cache: dict, gy: np.ndarray):
        """Gradients of a scalar loss from upstream gy (N, n_out).

        Returns ({coef, w_b, w_s} gradients, input gradient (N, n_in)).
        The spline contributes zero input gradient for clamped inputs
        (it is flat there); the base path always contributes.
        """
        g_wb = gy.T @ cache["sb"]
        g_ws = np.einsum("nq,nqp->qp", gy, cache["spline"])
        g_coef = np.einsum("nq,npb->qpb", gy, cache["basis"]) * self.w_s[:, :, None]
        dspline = np.einsum("npb,qpb->nqp", cache["dbasis"], self.coef)
        gx_spline = np.einsum("nq,qp,nqp->np", gy, self.w_s, dspline)
        gx = gy @ self.w_b * silu_grad(cache["x"]) + np.where(
            cache["inside"], gx_spline, 0.0
        )
        return [g_coef, g_wb, g_ws], gx


def kan_init(n_in: int, n_out: int, grid: BSplineGrid, rng: np.random.Generator) -> KanLayer:
    """Fresh layer: unit base/spline weights, small random spline coefficients."""
    coef = rng.normal(0.0, COEF_INIT_SCALE / np.sqrt(grid.n_basis), size=(n_out, n_in, grid.n_basis))
    return KanLayer(
        n_in=n_in, n_out=n_out, grid=grid,
        coef=coef,
        w_b=np.ones((n_out, n_in)),
        w_s=np.ones((n_out, n_in)),
    )


class KanNetwork:
    """Chain of KanLayers with matching widths."""

    def __init__(self, layers: list[KanLayer]):
        for a, b in zip(layers, layers[1:]):
            if a.n_out != b.n_in:
                raise ValueError(f"layer widths do not chain: {a.n_out} -> {b.n_in}")
        self.layers = layers

    @classmethod
    def init(cls, widths: list[int], grid: BSplineGrid, rng: np.random.Generator) -> "KanNetwork":
        if len(widths) < 2:
            raise ValueError("need at least input and output widths")
        layers = [
            kan_init(n_in, n_out, grid, rng)
            for n_in, n_out in zip(widths, widths[1:])
        ]
        return cls(layers)

    @property
    def widths(self) -> list[int]:
        return [self.layers[0].n_in] + [layer.n_out for layer in self.layers]

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_with_cache(self, x: np.ndarray):
        caches = []
        for layer in self.layers:
            x, c = layer.forward(x, cache=True)
            caches.append(c)
        return x, caches

    def backward(self, caches: list[dict], gy: np.ndarray):
        """Returns (flat gradient list aligned with parameters(), input grad)."""
        grads: list[list[np.ndarray]] = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            g, gy = layer.backward(cache, gy)
            grads.append(g)
        flat: list[np.ndarray] = []
        for g in reversed(grads):
            flat.extend(g)
        return flat, gy

    def parameters(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend(layer.parameters())
        return out

    def to_jsonable(self) -> dict:
        return {
            "layers": [
                {
                    "n_in": layer.n_in,
                    "n_out": layer.n_out,
                    "grid": layer.grid.to_jsonable(),
                    "coef": layer.coef.tolist(),
                    "w_b": layer.w_b.tolist(),
                    "w_s": layer.w_s.tolist(),
                }
                for layer in self.layers
            ]
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "KanNetwork":
        layers = [
            KanLayer(
                n_in=int(spec["n_in"]),
                n_out=int(spec["n_out"]),
                grid=BSplineGrid.from_jsonable(spec["grid"]),
                coef=np.array(spec["coef"], dtype=np.float64),
                w_b=np.array(spec["w_b"], dtype=np.float64),
                w_s=np.array(spec["w_s"], dtype=np.float64),
            )
            for spec in obj["layers"]
        ]
        return cls(layers)
