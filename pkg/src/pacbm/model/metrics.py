"""Evaluation report: confusion-matrix scores plus per-concept quality."""

from __future__ import annotations

import dataclasses

import numpy as np

from .core import PaCBMModel, forward_batch
from .training import PatchDataset

EVAL_BATCH = 1024


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
    return cm


def overall_accuracy(cm: np.ndarray) -> float:
    return float(np.trace(cm) / cm.sum())


def average_accuracy(cm: np.ndarray) -> float:
    """Mean per-class recall; classes with no samples are skipped."""
    rows = cm.sum(axis=1)
    present = rows > 0
    recalls = np.diag(cm)[present] / rows[present]
    return float(recalls.mean())


def kappa_statistic(cm: np.ndarray) -> float:
    n = cm.sum()
    po = np.trace(cm) / n
    pe = float(np.sum(cm.sum(axis=1) * cm.sum(axis=0))) / (n * n)
    if pe == 1.0:
        return 1.0 if po == 1.0 else 0.0
    return float((po - pe) / (1.0 - pe))


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged (no scipy dependency)."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def binary_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based AUC; NaN when one class is absent (undefined)."""
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = _average_ranks(np.asarray(scores, dtype=np.float64))
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclasses.dataclass
class EvalReport:
    confusion: np.ndarray          # (C, C) counts, rows = truth
    oa: float
    aa: float
    kappa: float
    per_class_accuracy: np.ndarray
    concept_accuracy: np.ndarray   # (33,) at threshold 0.5
    concept_auc: np.ndarray        # (33,), NaN where ground truth is constant
    mean_concept_auc: float        # over non-degenerate concepts
    decision_head: str
    direct_oa: float               # the parallel stream, reported for comparison

    def to_jsonable(self) -> dict:
        return {
            "confusion": self.confusion.tolist(),
            "oa": self.oa,
            "aa": self.aa,
            "kappa": self.kappa,
            "per_class_accuracy": self.per_class_accuracy.tolist(),
            "concept_accuracy": self.concept_accuracy.tolist(),
            "concept_auc": [None if np.isnan(a) else a for a in self.concept_auc],
            "mean_concept_auc": self.mean_concept_auc,
            "decision_head": self.decision_head,
            "direct_oa": self.direct_oa,
        }


def evaluate(model: PaCBMModel, data: PatchDataset) -> EvalReport:
    """Score the concept-path decisions (and the direct stream) on a dataset."""
    if len(data) == 0:
        raise ValueError("empty evaluation dataset")
    preds = []
    direct_preds = []
    probs = []
    for start in range(0, len(data), EVAL_BATCH):
        out = forward_batch(model, data.summaries[start:start + EVAL_BATCH])
        preds.append(np.argmax(out["path_logits"], axis=1))
        direct_preds.append(np.argmax(out["direct_logits"], axis=1))
        probs.append(out["concept_probs"])
    y_pred = np.concatenate(preds)
    y_direct = np.concatenate(direct_preds)
    p = np.vstack(probs)

    n_classes = model.n_classes
    cm = confusion_matrix(data.labels, y_pred, n_classes)
    rows = cm.sum(axis=1)
    per_class = np.divide(np.diag(cm), rows, out=np.zeros(n_classes), where=rows > 0)

    c_true = data.concepts
    concept_acc = ((p >= 0.5) == (c_true >= 0.5)).mean(axis=0)
    concept_auc = np.array([binary_auc(p[:, k], c_true[:, k]) for k in range(p.shape[1])])
    defined = ~np.isnan(concept_auc)

    return EvalReport(
        confusion=cm,
        oa=overall_accuracy(cm),
        aa=average_accuracy(cm),
        kappa=kappa_statistic(cm),
        per_class_accuracy=per_class,
        concept_accuracy=concept_acc,
        concept_auc=concept_auc,
        mean_concept_auc=float(concept_auc[defined].mean()) if defined.any() else float("nan"),
        decision_head="concept-path",
        direct_oa=float(np.mean(y_direct == data.labels)),
    )
