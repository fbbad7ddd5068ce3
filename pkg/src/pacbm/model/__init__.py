from .core import (
    EncoderParams,
    PaCBMModel,
    encoder_forward,
    init_model,
    intervene,
    loss_cls,
    loss_concept,
    loss_total,
    model_forward,
)
from .checkpoint import load_model, save_model
from .classifier import PaCBMClassifier
from .metrics import EvalReport, evaluate, kappa_statistic
from .training import (
    PatchDataset,
    TrainConfig,
    build_datasets,
    train_baseline,
    train_independent,
    train_joint,
    train_sequential,
)

__all__ = [
    "EncoderParams",
    "EvalReport",
    "PaCBMClassifier",
    "PaCBMModel",
    "PatchDataset",
    "TrainConfig",
    "build_datasets",
    "encoder_forward",
    "evaluate",
    "init_model",
    "intervene",
    "kappa_statistic",
    "load_model",
    "loss_cls",
    "loss_concept",
    "loss_total",
    "model_forward",
    "save_model",
    "train_baseline",
    "train_independent",
    "train_joint",
    "train_sequential",
]
