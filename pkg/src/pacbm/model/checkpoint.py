"""PACBM v1 checkpoint: one JSON document, full float64 precision.

Arrays are serialized as nested lists of Python floats (repr round-trips
float64 exactly), with a fixed field order, so save -> load -> predict is
bit-identical and re-saving reproduces identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..concepts import ClassConceptTable
from ..kan.network import KanNetwork
from .core import EncoderParams, PaCBMModel

FORMAT = "PACBM v1"


def save_model(model: PaCBMModel, path: str | Path) -> None:
    doc = {
        "format": FORMAT,
        "config": model.config,
        "vocabulary": [[g, n] for g, n in model.vocabulary],
        "class_table": model.class_table.to_jsonable(),
        "normalization": {
            "mean": model.encoder.norm_mean.tolist(),
            "std": model.encoder.norm_std.tolist(),
        },
        "encoder": {
            "w1": model.encoder.w1.tolist(),
            "b1": model.encoder.b1.tolist(),
            "w2": model.encoder.w2.tolist(),
            "b2": model.encoder.b2.tolist(),
        },
        "direct_head": {
            "w": model.direct_w.tolist(),
            "b": model.direct_b.tolist(),
        },
        "kan_f2c": model.kan_f2c.to_jsonable(),
        "kan_c2t": model.kan_c2t.to_jsonable(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> PaCBMModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"not a valid checkpoint: {e}") from e
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
    enc = EncoderParams(
        w1=np.array(doc["encoder"]["w1"], dtype=np.float64),
        b1=np.array(doc["encoder"]["b1"], dtype=np.float64),
        w2=np.array(doc["encoder"]["w2"], dtype=np.float64),
        b2=np.array(doc["encoder"]["b2"], dtype=np.float64),
        norm_mean=np.array(doc["normalization"]["mean"], dtype=np.float64),
        norm_std=np.array(doc["normalization"]["std"], dtype=np.float64),
    )
    return PaCBMModel(
        encoder=enc,
        direct_w=np.array(doc["direct_head"]["w"], dtype=np.float64),
        direct_b=np.array(doc["direct_head"]["b"], dtype=np.float64),
        kan_f2c=KanNetwork.from_jsonable(doc["kan_f2c"]),
        kan_c2t=KanNetwork.from_jsonable(doc["kan_c2t"]),
        vocabulary=[(g, n) for g, n in doc["vocabulary"]],
        class_table=ClassConceptTable.from_jsonable(doc["class_table"]),
        config=doc["config"],
    )
