"""Human-facing explanations of a trained model.

Symbolic formulas are fitted to the concept-to-class map over a sample
of the concept cube (the class table rows plus seeded uniform draws), so
the rendered expressions describe the function where interventions
actually operate. The formula never replaces the network.
"""

from __future__ import annotations

import numpy as np

from ..kan.symbolic import extract_formulas, render_formula
from .core import PaCBMModel, concepts_to_kan_input, forward_batch
from .metrics import EVAL_BATCH
from .training import PatchDataset

N_FORMULA_SAMPLES = 192
FORMULA_SEED = 20_240_101


def concept_variable_names(n: int = 33) -> list[str]:
    return [f"c{i + 1}" for i in range(n)]


def formula_sample_inputs(model: PaCBMModel) -> np.ndarray:
    """Concept activations covering the intervention domain, as KAN inputs."""
    rng = np.random.default_rng(FORMULA_SEED)
    table = model.class_table.vectors
    soft = np.clip(table + rng.normal(0.0, 0.15, (3, *table.shape)), 0.0, 1.0)
    uniform = rng.uniform(0.0, 1.0, (N_FORMULA_SAMPLES, table.shape[1]))
    p = np.vstack([table, soft.reshape(-1, table.shape[1]), uniform])
    return concepts_to_kan_input(p)


def _r2(pred: np.ndarray, ref: np.ndarray) -> float:
    ss_tot = float(np.sum((ref - ref.mean()) ** 2))
    if ss_tot <= 0:
        return 1.0
    return 1.0 - float(np.sum((pred - ref) ** 2)) / ss_tot


def formula_document(model: PaCBMModel) -> dict:
    """Per-class symbolic formulas for the concept-to-class map."""
    u = formula_sample_inputs(model)
    formulas = extract_formulas(model.kan_c2t, u)
    logits = model.kan_c2t.forward(u)
    names = concept_variable_names(len(model.vocabulary))
    classes = []
    for k, formula in enumerate(formulas):
        classes.append(
            {
                "class_index": k,
                "class_name": model.class_table.class_names[k],
                "text": render_formula(formula, var_names=names),
                "fidelity_r2": _r2(formula.evaluate(u), logits[:, k]),
                "min_edge_r2": float(min(formula.edge_r2)) if formula.edge_r2 else 1.0,
                "formula": formula.to_jsonable(),
            }
        )
    return {
        "variables": names,
        "concept_names": [name for _, name in model.vocabulary],
        "classes": classes,
    }


def find_intervention_flip(model: PaCBMModel, data: PatchDataset,
                           max_samples: int = 512) -> dict | None:
    """Search for a single-concept edit that changes a predicted label.

    Prefers flips that correct a misclassified sample (the workflow the
    concept editor exists for); falls back to any label change. Returns
    None when nothing flips.
    """
    n = min(len(data), max_samples)
    probs = []
    for start in range(0, n, EVAL_BATCH):
        probs.append(forward_batch(model, data.summaries[start:start + EVAL_BATCH])["concept_probs"])
    p = np.vstack(probs)[:n]
    base_logits = model.kan_c2t.forward(concepts_to_kan_input(p))
    base_pred = np.argmax(base_logits, axis=1)
    y = data.labels[:n]

    fallback = None
    order = np.argsort(base_pred == y, kind="stable")  # misclassified first
    for i in order:
        for k in range(p.shape[1]):
            for value in (0.0, 1.0):
                if abs(p[i, k] - value) < 0.5:
                    continue  # only decisive moves across the midpoint
                q = p[i].copy()
                q[k] = value
                new = int(np.argmax(model.kan_c2t.forward(concepts_to_kan_input(q)[None, :])[0]))
                if new == base_pred[i]:
                    continue
                flip = {
                    "sample_index": int(i),
                    "anchor": [int(a) for a in data.anchors[i]],
                    "true_label": int(y[i]),
                    "old_label": int(base_pred[i]),
                    "new_label": new,
                    "concept_index": int(k),
                    "old_value": float(p[i, k]),
                    "new_value": value,
                    "corrects_error": bool(base_pred[i] != y[i] and new == y[i]),
                }
                if flip["corrects_error"]:
                    return flip
                if fallback is None:
                    fallback = flip
    return fallback
