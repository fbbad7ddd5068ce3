"""Scikit-learn estimator facade over the concept-bottleneck trainers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..concepts import ClassConceptTable, N_CONCEPTS
from .core import forward_batch, patch_summary
from .training import PatchDataset, TrainConfig, train


def _check_patches(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 4 or X.shape[3] != 9 or X.shape[1] != X.shape[2]:
        raise ValueError(f"X must be (n_samples, side, side, 9), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("patches must be finite")
    return X


class PaCBMClassifier(BaseEstimator, ClassifierMixin):
    """Patch classifier routed through a polarimetric concept bottleneck.

    X is an array of square 9-channel patches (n, side, side, 9); y are
    class indices. `class_concepts` is the binary class-to-concept table
    (C x 33) that supervises the bottleneck; pass it at construction or
    to fit().
    """

    def __init__(self, strategy="joint", lam=0.7, epochs=100, batch_size=256,
                 lr=0.001, seed=0, grid_size=7, spline_order=3, hidden_c2t=16,
                 detach_concepts=False, class_concepts=None, class_names=None):
        self.strategy = strategy
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.grid_size = grid_size
        self.spline_order = spline_order
        self.hidden_c2t = hidden_c2t
        self.detach_concepts = detach_concepts
        self.class_concepts = class_concepts
        self.class_names = class_names

    def _config(self) -> TrainConfig:
        return TrainConfig(
            strategy=self.strategy, epochs=self.epochs, batch_size=self.batch_size,
            lr=self.lr, lam=self.lam, seed=self.seed,
            detach_concepts=self.detach_concepts, grid_size=self.grid_size,
            spline_order=self.spline_order, hidden_c2t=self.hidden_c2t,
        )

    def fit(self, X, y, class_concepts=None):
        X = _check_patches(X)
        y = np.asarray(y, dtype=int)
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per patch")
        self.classes_ = np.unique(y)
        n_classes = int(self.classes_.max()) + 1
        concepts = class_concepts if class_concepts is not None else self.class_concepts
        if concepts is None:
            raise ValueError("class_concepts (C x 33 binary table) is required")
        concepts = np.asarray(concepts, dtype=np.float64)
        if concepts.shape != (n_classes, N_CONCEPTS):
            raise ValueError(f"class_concepts must be ({n_classes}, {N_CONCEPTS})")
        names = list(self.class_names) if self.class_names else [
            f"class-{i}" for i in range(n_classes)
        ]
        table = ClassConceptTable(class_names=names, vectors=concepts)

        summaries = np.stack([patch_summary(p) for p in X])
        data = PatchDataset(
            summaries=summaries, labels=y, concepts=concepts[y],
            anchors=np.zeros((len(y), 2), dtype=int), class_table=table,
        )
        # channel stats over all training patch values
        flat = X.reshape(-1, 9)
        std = flat.std(axis=0)
        if np.any(std <= 0):
            raise ValueError("degenerate channel (zero variance) in X")
        self.model_ = train(data, self._config(), norm=(flat.mean(axis=0), std))
        self.n_features_in_ = X[0].size
        return self

    def _forward(self, X):
        check_is_fitted(self, "model_")
        X = _check_patches(X)
        summaries = np.stack([patch_summary(p) for p in X])
        return forward_batch(self.model_, summaries)

    def predict(self, X):
        return np.argmax(self._forward(X)["path_logits"], axis=1)

    def predict_proba(self, X):
        logits = self._forward(X)["path_logits"]
        z = np.exp(logits - logits.max(axis=1, keepdims=True))
        return z / z.sum(axis=1, keepdims=True)

    def predict_concepts(self, X):
        """Concept activations in [0,1], shape (n_samples, 33)."""
        return self._forward(X)["concept_probs"]

    def decision_function(self, X):
        return self._forward(X)["path_logits"]
