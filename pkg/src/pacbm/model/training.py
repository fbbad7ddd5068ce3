"""Dataset sampling protocol and the three training strategies.

Per class, 2000 training and 500 validation anchors are drawn without
replacement from the labeled pixels whose 15x15 patch fits inside the
scene; channel normalization is fit on the training patches only. All
trainers are bit-deterministic functions of (data, config): parameter
initialization, batch shuffling and every reduction happen in a fixed
order from seeded generators.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..concepts import ClassConceptTable
from ..kan.optim import Adam
from ..scene import PATCH_SIZE, UNLABELED, Scene
from ..synth import class_table_from_prototypes, prototypes_from_scene
from .core import (
    PaCBMModel,
    concepts_to_kan_input,
    forward_batch,
    init_model,
    loss_and_grads,
    loss_cls,
    patch_summary,
)

TRAIN_PER_CLASS = 2000
VAL_PER_CLASS = 500


@dataclasses.dataclass
class TrainConfig:
    strategy: str = "joint"  # joint | sequential | independent | baseline
    epochs: int = 100
    batch_size: int = 256
    lr: float = 0.001
    lam: float = 0.7
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    detach_concepts: bool = False
    grid_size: int = 7
    spline_order: int = 3
    hidden_c2t: int = 16

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")

    def to_jsonable(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass
class PatchDataset:
    """Precomputed raw patch summaries with labels and concept targets."""

    summaries: np.ndarray  # (N, 27) raw (un-normalized)
    labels: np.ndarray     # (N,)
    concepts: np.ndarray   # (N, 33) class-level ground truth
    anchors: np.ndarray    # (N, 2) row, col
    class_table: ClassConceptTable

    def __len__(self) -> int:
        return len(self.labels)


def labeled_anchors(scene: Scene, patch_size: int = PATCH_SIZE) -> np.ndarray:
    """(row, col) of labeled pixels whose patch fits inside the scene."""
    half = patch_size // 2
    lab = scene.labels[half:scene.height - half, half:scene.width - half]
    rows, cols = np.nonzero(lab != UNLABELED)
    return np.stack([rows + half, cols + half], axis=1)


def _summaries_for_anchors(scene: Scene, anchors: np.ndarray,
                           patch_size: int = PATCH_SIZE) -> np.ndarray:
    half = patch_size // 2
    out = np.empty((len(anchors), 27), dtype=np.float64)
    for i, (r, c) in enumerate(anchors):
        out[i] = patch_summary(scene.features[r - half:r + half + 1, c - half:c + half + 1])
    return out


def _normalization_stats(scene: Scene, anchors: np.ndarray,
                         patch_size: int = PATCH_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean/std over every pixel of the training patches."""
    half = patch_size // 2
    n = 0
    acc = np.zeros(9)
    acc2 = np.zeros(9)
    for r, c in anchors:
        block = scene.features[r - half:r + half + 1, c - half:c + half + 1]
        acc += block.sum(axis=(0, 1))
        acc2 += (block**2).sum(axis=(0, 1))
        n += patch_size * patch_size
    mean = acc / n
    var = np.maximum(acc2 / n - mean**2, 0.0)
    std = np.sqrt(var)
    if np.any(std <= 0.0):
        raise ValueError("degenerate channel (zero variance) in training split")
    return mean, std


def build_datasets(
    scene: Scene,
    seed: int,
    train_per_class: int = TRAIN_PER_CLASS,
    val_per_class: int = VAL_PER_CLASS,
    patch_size: int = PATCH_SIZE,
) -> tuple[PatchDataset, PatchDataset, np.ndarray, np.ndarray]:
    """Stratified train/val anchor split plus train-split channel stats.

    Returns (train, val, norm_mean, norm_std).
    """
    table = class_table_from_prototypes(prototypes_from_scene(scene))
    anchors = labeled_anchors(scene, patch_size)
    labels = scene.labels[anchors[:, 0], anchors[:, 1]]
    rng = np.random.default_rng([seed, 0])
    train_idx: list[np.ndarray] = []
    val_idx: list[np.ndarray] = []
    for cls in range(len(table.class_names)):
        pool = np.nonzero(labels == cls)[0]
        need = train_per_class + val_per_class
        if len(pool) < need:
            raise ValueError(
                f"class {table.class_names[cls]!r} has {len(pool)} usable anchors, needs {need}"
            )
        pick = rng.permutation(len(pool))[:need]
        chosen = pool[pick]
        train_idx.append(chosen[:train_per_class])
        val_idx.append(chosen[train_per_class:])
    train_sel = np.concatenate(train_idx)
    val_sel = np.concatenate(val_idx)

    def make(sel: np.ndarray) -> PatchDataset:
        a = anchors[sel]
        y = labels[sel].astype(int)
        return PatchDataset(
            summaries=_summaries_for_anchors(scene, a, patch_size),
            labels=y,
            concepts=table.vectors[y],
            anchors=a,
            class_table=table,
        )

    mean, std = _normalization_stats(scene, anchors[train_sel], patch_size)
    return make(train_sel), make(val_sel), mean, std


def _shuffle_rng(cfg: TrainConfig, stage: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, 1000 + stage])


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def _fresh_model(data: PatchDataset, cfg: TrainConfig,
                 norm: tuple[np.ndarray, np.ndarray] | None) -> PaCBMModel:
    config = {
        "lambda": cfg.lam,
        "strategy": cfg.strategy,
        "seed": cfg.seed,
        "grid_size": cfg.grid_size,
        "spline_order": cfg.spline_order,
        "hidden_c2t": cfg.hidden_c2t,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "lr": cfg.lr,
        "detach_concepts": cfg.detach_concepts,
    }
    model = init_model(data.class_table, config, cfg.seed)
    if norm is not None:
        model.encoder.norm_mean = np.asarray(norm[0], dtype=np.float64)
        model.encoder.norm_std = np.asarray(norm[1], dtype=np.float64)
    return model


def _run_stage1(model: PaCBMModel, data: PatchDataset, cfg: TrainConfig, *,
                use_path: bool, use_concept_loss: bool, train_c2t: bool) -> list[float]:
    """Shared optimization loop over encoder + direct head + f->c (+ c->t)."""
    params = model.parameters()
    n_stage = len(params) if train_c2t else 6 + len(model.kan_f2c.parameters())
    if not use_path and not use_concept_loss:
        n_stage = 6  # baseline: encoder + direct head only
    opt = Adam(params[:n_stage], lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    rng = _shuffle_rng(cfg, stage=1)
    history = []
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        for idx in _epoch_batches(len(data), cfg.batch_size, rng):
            loss, grads, _ = loss_and_grads(
                model, data.summaries[idx], data.labels[idx], data.concepts[idx],
                cfg.lam, use_path=use_path, use_concept_loss=use_concept_loss,
                detach_concepts=cfg.detach_concepts,
            )
            opt.step(grads[:n_stage])
            epoch_loss += loss * len(idx)
        history.append(epoch_loss / len(data))
    return history


def _train_c2t_on_inputs(model: PaCBMModel, u: np.ndarray, y: np.ndarray,
                         cfg: TrainConfig) -> list[float]:
    """Stage 2: fit the concept-to-class map alone on fixed inputs."""
    opt = Adam(model.kan_c2t.parameters(), lr=cfg.lr, beta1=cfg.beta1,
               beta2=cfg.beta2, eps=cfg.eps)
    rng = _shuffle_rng(cfg, stage=2)
    history = []
    n = len(y)
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        for idx in _epoch_batches(n, cfg.batch_size, rng):
            logits, caches = model.kan_c2t.forward_with_cache(u[idx])
            loss = loss_cls(logits, y[idx])
            p = np.exp(logits - logits.max(axis=1, keepdims=True))
            p /= p.sum(axis=1, keepdims=True)
            p[np.arange(len(idx)), y[idx]] -= 1.0
            grads, _ = model.kan_c2t.backward(caches, p / len(idx))
            opt.step(grads)
            epoch_loss += loss * len(idx)
        history.append(epoch_loss / n)
    return history


def train_joint(data: PatchDataset, cfg: TrainConfig,
                norm: tuple[np.ndarray, np.ndarray] | None = None) -> PaCBMModel:
    """Single optimization of both streams plus the concept supervision."""
    model = _fresh_model(data, cfg, norm)
    history = _run_stage1(model, data, cfg, use_path=True, use_concept_loss=True,
                          train_c2t=True)
    model.config["loss_history"] = history
    return model


def train_baseline(data: PatchDataset, cfg: TrainConfig,
                   norm: tuple[np.ndarray, np.ndarray] | None = None) -> PaCBMModel:
    """Encoder + direct head only; the concept maps stay at initialization."""
    model = _fresh_model(data, cfg, norm)
    history = _run_stage1(model, data, cfg, use_path=False, use_concept_loss=False,
                          train_c2t=False)
    model.config["loss_history"] = history
    return model


def train_sequential(data: PatchDataset, cfg: TrainConfig,
                     norm: tuple[np.ndarray, np.ndarray] | None = None) -> PaCBMModel:
    """Stage 1 learns concepts; stage 2 maps *predicted* concepts to classes."""
    model = _fresh_model(data, cfg, norm)
    h1 = _run_stage1(model, data, cfg, use_path=False, use_concept_loss=True,
                     train_c2t=False)
    out = forward_batch(model, data.summaries)
    u = concepts_to_kan_input(out["concept_probs"])
    h2 = _train_c2t_on_inputs(model, u, data.labels, cfg)
    model.config["loss_history"] = h1 + h2
    return model


def train_independent(data: PatchDataset, cfg: TrainConfig,
                      norm: tuple[np.ndarray, np.ndarray] | None = None) -> PaCBMModel:
    """Stage 1 as sequential; stage 2 maps *ground-truth* concepts to classes."""
    model = _fresh_model(data, cfg, norm)
    h1 = _run_stage1(model, data, cfg, use_path=False, use_concept_loss=True,
                     train_c2t=False)
    u = concepts_to_kan_input(data.concepts)
    h2 = _train_c2t_on_inputs(model, u, data.labels, cfg)
    model.config["loss_history"] = h1 + h2
    return model


TRAINERS = {
    "joint": train_joint,
    "sequential": train_sequential,
    "independent": train_independent,
    "baseline": train_baseline,
}


def train(data: PatchDataset, cfg: TrainConfig,
          norm: tuple[np.ndarray, np.ndarray] | None = None) -> PaCBMModel:
    try:
        trainer = TRAINERS[cfg.strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {cfg.strategy!r}") from None
    return trainer(data, cfg, norm)
