"""The parallel concept-bottleneck model and its losses.

A patch is reduced to a 27-dim summary (per-channel mean, per-channel
std, center pixel of the z-scored 15x15x9 window), pushed through a
small tanh encoder into 32 bounded features, and read out twice in
parallel: a linear direct head, and the interpretable route
features -> 33 concept activations -> class logits, both concept maps
realized by spline-edge networks. The final decision is taken from the
concept path so that concept edits change the answer.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..concepts import ClassConceptTable, VOCABULARY
from ..kan.bspline import BSplineGrid
from ..kan.network import KanNetwork, sigmoid

N_FEATURES = 32
N_HIDDEN_ENCODER = 64
N_SUMMARY = 27
N_CONCEPTS = 33


@dataclasses.dataclass
class EncoderParams:
    w1: np.ndarray  # (64, 27)
    b1: np.ndarray  # (64,)
    w2: np.ndarray  # (32, 64)
    b2: np.ndarray  # (32,)
    norm_mean: np.ndarray  # (9,) channel mean, fit on the training split
    norm_std: np.ndarray   # (9,) channel std, > 0

    def parameters(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]


@dataclasses.dataclass
class PaCBMModel:
    encoder: EncoderParams
    direct_w: np.ndarray  # (C, 32)
    direct_b: np.ndarray  # (C,)
    kan_f2c: KanNetwork   # [32 -> 33]
    kan_c2t: KanNetwork   # [33 -> 16 -> C]
    vocabulary: list[tuple[str, str]]
    class_table: ClassConceptTable
    config: dict

    @property
    def n_classes(self) -> int:
        return self.direct_w.shape[0]

    def parameters(self) -> list[np.ndarray]:
        """Fixed order: encoder, direct head, f->c map, c->t map."""
        return (
            self.encoder.parameters()
            + [self.direct_w, self.direct_b]
            + self.kan_f2c.parameters()
            + self.kan_c2t.parameters()
        )


def init_model(class_table: ClassConceptTable, config: dict, seed: int) -> PaCBMModel:
    """Deterministic initialization; the draw order is part of the contract
    (a baseline and a full model share per-parameter initial values)."""
    rng = np.random.default_rng(seed)
    n_classes = len(class_table.class_names)
    grid = BSplineGrid(order=int(config.get("spline_order", 3)),
                       size=int(config.get("grid_size", 7)))
    hidden = int(config.get("hidden_c2t", 16))
    enc = EncoderParams(
        w1=rng.normal(0.0, 1.0 / np.sqrt(N_SUMMARY), (N_HIDDEN_ENCODER, N_SUMMARY)),
        b1=np.zeros(N_HIDDEN_ENCODER),
        w2=rng.normal(0.0, 1.0 / np.sqrt(N_HIDDEN_ENCODER), (N_FEATURES, N_HIDDEN_ENCODER)),
        b2=np.zeros(N_FEATURES),
        norm_mean=np.zeros(9),
        norm_std=np.ones(9),
    )
    direct_w = rng.normal(0.0, 1.0 / np.sqrt(N_FEATURES), (n_classes, N_FEATURES))
    direct_b = np.zeros(n_classes)
    kan_f2c = KanNetwork.init([N_FEATURES, N_CONCEPTS], grid, rng)
    kan_c2t = KanNetwork.init([N_CONCEPTS, hidden, n_classes], grid, rng)
    return PaCBMModel(
        encoder=enc,
        direct_w=direct_w,
        direct_b=direct_b,
        kan_f2c=kan_f2c,
        kan_c2t=kan_c2t,
        vocabulary=list(VOCABULARY),
        class_table=class_table,
        config=dict(config),
    )


def patch_summary(patch_data: np.ndarray) -> np.ndarray:
    """Raw 27-dim summary: channel means (9) + channel stds (9) + center (9)."""
    d = np.asarray(patch_data, dtype=np.float64)
    if d.ndim != 3 or d.shape[2] != 9:
        raise ValueError(f"patch must be (side, side, 9), got {d.shape}")
    if d.shape[0] != d.shape[1]:
        raise ValueError("patch must be square")
    center = d[d.shape[0] // 2, d.shape[1] // 2]
    return np.concatenate([d.mean(axis=(0, 1)), d.std(axis=(0, 1)), center])


def normalize_summary(raw: np.ndarray, enc: EncoderParams) -> np.ndarray:
    """Apply the stored z-scoring to raw summaries (affine per block)."""
    mu = np.concatenate([enc.norm_mean, np.zeros(9), enc.norm_mean])
    sd = np.concatenate([enc.norm_std, enc.norm_std, enc.norm_std])
    return (raw - mu) / sd


def _encode(enc: EncoderParams, s: np.ndarray):
    h1 = np.tanh(s @ enc.w1.T + enc.b1)
    feat = np.tanh(h1 @ enc.w2.T + enc.b2)
    return h1, feat


def encoder_forward(patch_data: np.ndarray, enc: EncoderParams) -> np.ndarray:
    """Bounded 32-dim feature vector for one patch."""
    s = normalize_summary(patch_summary(patch_data), enc)
    _, feat = _encode(enc, s[None, :])
    return feat[0]


def concepts_to_kan_input(p: np.ndarray) -> np.ndarray:
    """[0,1] concept activations mapped affinely onto the spline grid range."""
    return 2.0 * np.asarray(p, dtype=np.float64) - 1.0


def forward_batch(model: PaCBMModel, raw_summaries: np.ndarray, *, cache: bool = False):
    """All heads on a batch of raw summaries.

    Returns a dict with features, direct_logits, concept_logits,
    concept_probs, path_logits; with cache=True also the intermediates
    the backward pass needs.
    """
    s = normalize_summary(np.asarray(raw_summaries, dtype=np.float64), model.encoder)
    h1, feat = _encode(model.encoder, s)
    direct = feat @ model.direct_w.T + model.direct_b
    if cache:
        cz, f2c_caches = model.kan_f2c.forward_with_cache(feat)
    else:
        cz = model.kan_f2c.forward(feat)
        f2c_caches = None
    p = sigmoid(cz)
    u = concepts_to_kan_input(p)
    if cache:
        path, c2t_caches = model.kan_c2t.forward_with_cache(u)
    else:
        path = model.kan_c2t.forward(u)
        c2t_caches = None
    out = {
        "features": feat,
        "direct_logits": direct,
        "concept_logits": cz,
        "concept_probs": p,
        "path_logits": path,
    }
    if cache:
        out["_cache"] = {"s": s, "h1": h1, "f2c": f2c_caches, "c2t": c2t_caches}
    return out


def model_forward(patch_data: np.ndarray, model: PaCBMModel) -> dict:
    """Single-patch forward pass; the predicted label is the concept-path argmax."""
    raw = patch_summary(patch_data)[None, :]
    out = forward_batch(model, raw)
    return {
        "features": out["features"][0],
        "direct_logits": out["direct_logits"][0],
        "concept_logits": out["concept_logits"][0],
        "concept_probs": out["concept_probs"][0],
        "concept_path_logits": out["path_logits"][0],
        "label": int(np.argmax(out["path_logits"][0])),
        "direct_label": int(np.argmax(out["direct_logits"][0])),
    }


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def loss_cls(logits: np.ndarray, y) -> float:
    """Softmax cross-entropy, averaged over the batch if 2-D."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 1:
        return float(-log_softmax(logits)[int(y)])
    y = np.asarray(y, dtype=int)
    return float(-log_softmax(logits)[np.arange(len(y)), y].mean())


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def loss_concept(concept_logits: np.ndarray, c: np.ndarray) -> float:
    """Binary cross-entropy with logits, mean over every (sample, concept)."""
    z = np.asarray(concept_logits, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if z.shape != c.shape:
        raise ValueError("logits and targets must have the same shape")
    return float(np.mean(c * _softplus(-z) + (1.0 - c) * _softplus(z)))


def loss_total(main: float, aux: float, lam: float) -> float:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return float(main + lam * aux)


def _ce_grad(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    p = np.exp(log_softmax(logits))
    p[np.arange(len(y)), y] -= 1.0
    return p / len(y)


def _bce_grad(z: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (sigmoid(z) - c) / z.size


def loss_and_grads(
    model: PaCBMModel,
    raw_summaries: np.ndarray,
    y: np.ndarray,
    c: np.ndarray,
    lam: float,
    *,
    use_path: bool = True,
    use_concept_loss: bool = True,
    detach_concepts: bool = False,
):
    """Total loss and analytic gradients for every model parameter.

    Gradients come back as a flat list aligned with model.parameters().
    With detach_concepts the concept stream still trains (on frozen
    features) but contributes nothing to the encoder gradient.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    y = np.asarray(y, dtype=int)
    c = np.asarray(c, dtype=np.float64)
    out = forward_batch(model, raw_summaries, cache=True)
    cache = out["_cache"]
    feat = out["features"]

    loss = loss_cls(out["direct_logits"], y)
    g_direct = _ce_grad(out["direct_logits"], y)
    g_wd = g_direct.T @ feat
    g_bd = g_direct.sum(axis=0)
    g_feat = g_direct @ model.direct_w

    gz = np.zeros_like(out["concept_logits"])
    f2c_grads = [np.zeros_like(p) for p in model.kan_f2c.parameters()]
    c2t_grads = [np.zeros_like(p) for p in model.kan_c2t.parameters()]
    if use_path:
        loss += loss_cls(out["path_logits"], y)
        g_path = _ce_grad(out["path_logits"], y)
        c2t_grads, g_u = model.kan_c2t.backward(cache["c2t"], g_path)
        p = out["concept_probs"]
        gz = gz + 2.0 * g_u * p * (1.0 - p)
    if use_concept_loss and lam > 0.0:
        loss = loss_total(loss, loss_concept(out["concept_logits"], c), lam)
        gz = gz + lam * _bce_grad(out["concept_logits"], c)
    if use_path or (use_concept_loss and lam > 0.0):
        f2c_grads, g_feat_concepts = model.kan_f2c.backward(cache["f2c"], gz)
        if not detach_concepts:
            g_feat = g_feat + g_feat_concepts

    # encoder backward through the two tanh layers
    enc = model.encoder
    h1 = cache["h1"]
    g_z2 = g_feat * (1.0 - feat**2)
    g_w2 = g_z2.T @ h1
    g_b2 = g_z2.sum(axis=0)
    g_h1 = g_z2 @ enc.w2
    g_z1 = g_h1 * (1.0 - h1**2)
    g_w1 = g_z1.T @ cache["s"]
    g_b1 = g_z1.sum(axis=0)

    grads = [g_w1, g_b1, g_w2, g_b2, g_wd, g_bd] + f2c_grads + c2t_grads
    return loss, grads, out


def intervene(concept_probs: np.ndarray, edits: dict, model: PaCBMModel) -> dict:
    """Re-run only the concept-to-class map on an edited activation vector."""
    p = np.asarray(concept_probs, dtype=np.float64).copy()
    if p.shape != (N_CONCEPTS,):
        raise ValueError(f"concept vector must have length {N_CONCEPTS}")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("concept activations must lie in [0, 1]")
    for idx, val in edits.items():
        idx = int(idx)
        if not 0 <= idx < N_CONCEPTS:
            raise ValueError(f"concept index {idx} out of range")
        val = float(val)
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"concept value {val} outside [0, 1]")
        p[idx] = val
    logits = model.kan_c2t.forward(concepts_to_kan_input(p)[None, :])[0]
    return {"logits": logits, "label": int(np.argmax(logits))}
