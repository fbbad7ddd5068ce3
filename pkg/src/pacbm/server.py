"""HTTP/JSON service over one immutable model + scene snapshot.

All state is loaded at startup and never mutated; interventions are
stateless request/response, so concurrent handling needs no locks.
Malformed bodies and out-of-range values return 400; a patch with the
wrong shape returns 422; unknown routes 404.
"""

from __future__ import annotations

import base64
import io
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .concepts import N_CONCEPTS, degree_of_polarization
from .decomposition import cloude_pottier
from .model.core import PaCBMModel, intervene, model_forward
from .model.explain import formula_document
from .scene import PATCH_SIZE, UNLABELED, Scene, extract_patch, pauli_rgb, valid_anchor


class PredictRequest(BaseModel):
    row: int | None = None
    col: int | None = None
    patch: list | None = None


class IntervenRequest(BaseModel):
    concepts: list[float]
    edits: dict[str, float] = {}


class DecomposeRequest(BaseModel):
    row: int
    col: int


def _png_base64(rgb: np.ndarray) -> str:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(model: PaCBMModel, scene: Scene, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="pacbm", docs_url=None, redoc_url=None)
    names = scene.class_names
    formulas_cache: dict = {}
    formulas_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors()[:1])})

    def require_anchor(row: int, col: int) -> None:
        if not (0 <= row < scene.height and 0 <= col < scene.width):
            raise HTTPException(400, f"pixel ({row}, {col}) outside the scene")
        if not valid_anchor(scene, row, col):
            raise HTTPException(400, f"pixel ({row}, {col}) is a border anchor")

    @app.get("/api/info")
    def info():
        return {
            "format": "PACBM v1",
            "class_names": names,
            "n_classes": len(names),
            "n_concepts": N_CONCEPTS,
            "patch_size": PATCH_SIZE,
            "decision_head": "concept-path",
            "config": {
                k: v for k, v in model.config.items() if not isinstance(v, (list, dict))
            },
        }

    @app.get("/api/concepts")
    def concepts():
        return {
            "groups": list(dict.fromkeys(g for g, _ in model.vocabulary)),
            "concepts": [
                {"index": i, "group": g, "name": n}
                for i, (g, n) in enumerate(model.vocabulary)
            ],
            "class_table": model.class_table.to_jsonable(),
        }

    @app.get("/api/scene")
    def scene_view():
        return {
            "width": scene.width,
            "height": scene.height,
            "class_names": names,
            "unlabeled": UNLABELED,
            "patch_half": PATCH_SIZE // 2,
            "pauli_rgb_png_base64": _png_base64(pauli_rgb(scene)),
            "labels": scene.labels.tolist(),
        }

    @app.post("/api/predict")
    def predict(req: PredictRequest):
        if req.patch is not None:
            try:
                arr = np.asarray(req.patch, dtype=float)
            except (TypeError, ValueError) as e:
                raise HTTPException(400, f"patch is not numeric: {e}") from e
            if arr.shape != (PATCH_SIZE, PATCH_SIZE, 9):
                raise HTTPException(
                    422, f"patch must be {PATCH_SIZE}x{PATCH_SIZE}x9, got {list(arr.shape)}"
                )
            if not np.all(np.isfinite(arr)):
                raise HTTPException(400, "patch contains non-finite values")
            data, true_label = arr, None
        elif req.row is not None and req.col is not None:
            require_anchor(req.row, req.col)
            patch = extract_patch(scene, req.row, req.col)
            data, true_label = patch.data, patch.label
        else:
            raise HTTPException(400, "provide either row/col or a patch")
        out = model_forward(data, model)
        return {
            "concepts": out["concept_probs"].tolist(),
            "direct_logits": out["direct_logits"].tolist(),
            "concept_path_logits": out["concept_path_logits"].tolist(),
            "label": out["label"],
            "label_name": names[out["label"]],
            "true_label": true_label,
            "true_label_name": None if true_label is None else names[true_label],
        }

    @app.post("/api/intervene")
    def intervene_route(req: IntervenRequest):
        if len(req.concepts) != N_CONCEPTS:
            raise HTTPException(400, f"concepts must have length {N_CONCEPTS}")
        try:
            edits = {int(k): float(v) for k, v in req.edits.items()}
            result = intervene(np.asarray(req.concepts, dtype=float), edits, model)
        except ValueError as e:
            raise HTTPException(400, str(e)) from e
        return {
            "logits": result["logits"].tolist(),
            "label": result["label"],
            "label_name": names[result["label"]],
        }

    @app.post("/api/decompose")
    def decompose_route(req: DecomposeRequest):
        require_anchor(req.row, req.col)
        from .decomposition import freeman_durden, huynen
        from .polarimetry import covariance_diagnostics, features9_to_t

        t = features9_to_t(scene.features[req.row, req.col])
        try:
            cp = cloude_pottier(t)
            fd = freeman_durden(covariance_diagnostics(t))
        except ValueError as e:
            raise HTTPException(400, str(e)) from e
        hy = huynen(t)
        total = fd.ps + fd.pd + fd.pv
        props = [fd.ps, fd.pd, fd.pv]
        if total > 0:
            props = [x / total for x in props]
        return {
            "entropy": cp.entropy,
            "alpha_bar": cp.alpha_bar,
            "anisotropy": cp.anisotropy,
            "ps": props[0],
            "pd": props[1],
            "pv": props[2],
            "span": float(sum(cp.lambdas)),
            "dop": degree_of_polarization(t),
            "huynen": {
                "a0": hy.a0, "b0": hy.b0, "b": hy.b, "c": hy.c, "d": hy.d,
                "e": hy.e, "f": hy.f, "g": hy.g, "h": hy.h,
            },
            "clamped": fd.clamped,
        }

    @app.get("/api/formulas")
    def formulas():
        with formulas_lock:
            if "doc" not in formulas_cache:
                formulas_cache["doc"] = formula_document(model)
        return formulas_cache["doc"]

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
