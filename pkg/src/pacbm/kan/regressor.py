"""Scikit-learn style regressor wrapping a spline-edge network."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .bspline import BSplineGrid
from .network import KanNetwork
from .optim import Adam


class KanRegressor(BaseEstimator, RegressorMixin):
    """Least-squares regression with learnable spline edge functions.

    Trains full-batch Adam on mean squared error; deterministic for a
    fixed seed. `hidden` lists the hidden-layer widths, e.g. (5,) for a
    [n_in -> 5 -> n_out] network.
    """

    def __init__(self, hidden=(), grid_size=7, spline_order=3,
                 grid_range=(-1.0, 1.0), lr=0.02, steps=2000, seed=0):
        self.hidden = hidden
        self.grid_size = grid_size
        self.spline_order = spline_order
        self.grid_range = grid_range
        self.lr = lr
        self.steps = steps
        self.seed = seed

    def _validate(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or not np.all(np.isfinite(X)):
            raise ValueError("X must be a finite 2-D array")
        if y is None:
            return X
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        if y.shape[0] != X.shape[0] or not np.all(np.isfinite(y)):
            raise ValueError("y must be finite with one row per sample")
        return X, y

    def fit(self, X, y):
        X, y = self._validate(X, y)
        grid = BSplineGrid(order=self.spline_order, size=self.grid_size,
                           lo=self.grid_range[0], hi=self.grid_range[1])
        widths = [X.shape[1], *self.hidden, y.shape[1]]
        rng = np.random.default_rng(self.seed)
        net = KanNetwork.init(widths, grid, rng)
        opt = Adam(net.parameters(), lr=self.lr)
        scale = 2.0 / y.size
        for _ in range(self.steps):
            pred, caches = net.forward_with_cache(X)
            grads, _ = net.backward(caches, scale * (pred - y))
            opt.step(grads)
        self.network_ = net
        self.n_features_in_ = X.shape[1]
        self.n_outputs_ = y.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = self._validate(X)
        out = self.network_.forward(X)
        return out[:, 0] if self.n_outputs_ == 1 else out
