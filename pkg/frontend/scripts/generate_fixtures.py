"""Record API fixtures for the UI test suite.

Builds the deterministic test scene and model (the same seeds the Python
test suite uses), finds a single-concept edit that flips a prediction,
and records the exact HTTP responses the UI tests replay. Run from the
frontend directory:

    python3 scripts/generate_fixtures.py

Requires the pacbm package (pip install -e ..) and writes
tests/fixtures/api-fixture.json.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from pacbm.model.checkpoint import load_model, save_model
from pacbm.model.explain import find_intervention_flip
from pacbm.model.training import TrainConfig, build_datasets, train_joint
from pacbm.scene import load_scene, save_scene
from pacbm.server import create_app
from pacbm.synth import default_scene_spec, generate_scene

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
OUT = FIXTURES / "api-fixture.json"
ARTIFACTS = FIXTURES / "artifacts"


def main() -> None:
    # round-trip scene and model through disk so the recorded responses are
    # bit-identical to what `pacbm serve` produces from the same artifacts
    ARTIFACTS.mkdir(parents=True, exist_ok=True)
    save_scene(generate_scene(default_scene_spec(seed=11, looks=8, region_size=48)),
               ARTIFACTS / "scene")
    scene = load_scene(ARTIFACTS / "scene")
    train_ds, val_ds, mean, std = build_datasets(
        scene, seed=17, train_per_class=250, val_per_class=80
    )
    cfg = TrainConfig(strategy="joint", lam=0.7, epochs=30, batch_size=256,
                      lr=0.003, seed=7)
    save_model(train_joint(train_ds, cfg, norm=(mean, std)), ARTIFACTS / "model.json")
    model = load_model(ARTIFACTS / "model.json")

    flip = find_intervention_flip(model, val_ds)
    if flip is None:
        raise SystemExit("no single-concept flip found; fixture cannot be built")
    row, col = flip["anchor"]

    client = TestClient(create_app(model, scene))
    predict = client.post("/api/predict", json={"row": row, "col": col}).json()
    edits = {str(flip["concept_index"]): flip["new_value"]}
    doc = {
        "designated": {
            "row": row,
            "col": col,
            "concept_index": flip["concept_index"],
            "new_value": flip["new_value"],
            "old_label": flip["old_label"],
            "new_label": flip["new_label"],
        },
        "info": client.get("/api/info").json(),
        "concepts": client.get("/api/concepts").json(),
        "scene": client.get("/api/scene").json(),
        "predict": predict,
        "decompose": client.post("/api/decompose", json={"row": row, "col": col}).json(),
        "intervene_flip": client.post(
            "/api/intervene", json={"concepts": predict["concepts"], "edits": edits}
        ).json(),
        "intervene_noop": client.post(
            "/api/intervene", json={"concepts": predict["concepts"], "edits": {}}
        ).json(),
    }
    OUT.write_text(json.dumps(doc) + "\n", encoding="utf-8")
    print(f"wrote {OUT} (flip: {flip['old_label']} -> {flip['new_label']} "
          f"via concept {flip['concept_index']})")
    print(f"serve the same artifacts with:\n  pacbm serve --model {ARTIFACTS}/model.json "
          f"--scene {ARTIFACTS}/scene")


if __name__ == "__main__":
    main()
