"""Uniform B-spline basis on a static grid, with analytic derivatives.

The grid covers [lo, hi] with `size` equal intervals and is extended by
`order` extra uniformly spaced knots on each side, giving size + order
basis functions that form a partition of unity on [lo, hi]. Inputs
outside the range are clamped to the boundary before evaluation.
"""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass
class BSplineGrid:
    order: int = 3
    size: int = 7
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("spline order must be >= 1")
        if self.size < 1:
            raise ValueError("grid size must be >= 1")
        if not self.lo < self.hi:
            raise ValueError("grid range must be non-empty")
        h = (self.hi - self.lo) / self.size
        self.knots = self.lo + h * np.arange(-self.order, self.size + self.order + 1)

    @property
    def n_basis(self) -> int:
        return self.size + self.order

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def to_jsonable(self) -> dict:
        return {"order": self.order, "size": self.size, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_jsonable(cls, obj: dict) -> "BSplineGrid":
        return cls(order=int(obj["order"]), size=int(obj["size"]),
                   lo=float(obj["lo"]), hi=float(obj["hi"]))


def _raise_degree(b: np.ndarray, x: np.ndarray, t: np.ndarray, d: int) -> np.ndarray:
    # Cox-de Boor step from degree d-1 to d; uniform knots, no 0/0 cases.
    left = (x - t[: -(d + 1)]) / (t[d:-1] - t[: -(d + 1)]) * b[..., :-1]
    right = (t[d + 1:] - x) / (t[d + 1:] - t[1:-d]) * b[..., 1:]
    return left + right


def bspline_basis(x: np.ndarray, grid: BSplineGrid) -> np.ndarray:
    """Basis values, shape x.shape + (n_basis,); clamps x into the range."""
    t = grid.knots
    xc = grid.clamp(np.asarray(x, dtype=np.float64))[..., None]
    b = ((xc >= t[:-1]) & (xc < t[1:])).astype(np.float64)
    for d in range(1, grid.order + 1):
        b = _raise_degree(b, xc, t, d)
    return b


def bspline_basis_and_derivative(x: np.ndarray, grid: BSplineGrid) -> tuple[np.ndarray, np.ndarray]:
    """Basis values and their x-derivatives (both x.shape + (n_basis,)).

    dB_i^k/dx = k * (B_i^{k-1}/(t_{i+k}-t_i) - B_{i+1}^{k-1}/(t_{i+k+1}-t_{i+1})).
    The derivative is of the clamped evaluation, so it is the one-sided
    value at the range boundary; clamp masking is the caller's concern.
    """
    t = grid.knots
    k = grid.order
    xc = grid.clamp(np.asarray(x, dtype=np.float64))[..., None]
    b = ((xc >= t[:-1]) & (xc < t[1:])).astype(np.float64)
    for d in range(1, k):
        b = _raise_degree(b, xc, t, d)
    lower = b  # degree k-1, n_basis + 1 functions
    db = k * (lower[..., :-1] / (t[k:-1] - t[:-k - 1]) - lower[..., 1:] / (t[k + 1:] - t[1:-k]))
    return _raise_degree(lower, xc, t, k), db
