import base64
import importlib.resources
import json

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from pacbm.server import create_app


@pytest.fixture(scope="module")
def client(fixture_model, small_scene):
    return TestClient(create_app(fixture_model, small_scene))


def check_schema(name, payload):
    schema = json.loads(
        importlib.resources.files("pacbm.schemas").joinpath(f"{name}.json").read_text()
    )
    jsonschema.validate(payload, schema)


class TestInfoConceptsScene:
    def test_info(self, client):
        r = client.get("/api/info")
        assert r.status_code == 200
        doc = r.json()
        check_schema("info", doc)
        assert doc["n_concepts"] == 33
        assert doc["decision_head"] == "concept-path"

    def test_concepts(self, client):
        r = client.get("/api/concepts")
        assert r.status_code == 200
        doc = r.json()
        check_schema("concepts", doc)
        assert len(doc["concepts"]) == 33
        assert len(doc["groups"]) == 9
        assert doc["concepts"][0]["name"] == "Surface scattering dominant"

    def test_scene_with_decodable_png(self, client, small_scene):
        r = client.get("/api/scene")
        assert r.status_code == 200
        doc = r.json()
        check_schema("scene", doc)
        assert doc["width"] == small_scene.width
        png = base64.b64decode(doc["pauli_rgb_png_base64"])
        assert png[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(doc["labels"]) == small_scene.height


class TestPredict:
    def test_by_coordinates(self, client):
        r = client.post("/api/predict", json={"row": 20, "col": 20})
        assert r.status_code == 200
        doc = r.json()
        check_schema("predict", doc)
        assert doc["true_label"] == 0
        assert 0 <= doc["label"] < 6

    def test_by_patch(self, client, small_scene):
        patch = small_scene.features[10:25, 10:25].tolist()
        r = client.post("/api/predict", json={"patch": patch})
        assert r.status_code == 200
        doc = r.json()
        check_schema("predict", doc)
        assert doc["true_label"] is None

    def test_wrong_patch_shape_is_422(self, client):
        patch = np.zeros((14, 14, 9)).tolist()
        assert client.post("/api/predict", json={"patch": patch}).status_code == 422

    def test_border_anchor_is_400(self, client):
        assert client.post("/api/predict", json={"row": 0, "col": 0}).status_code == 400

    def test_missing_fields_is_400(self, client):
        assert client.post("/api/predict", json={}).status_code == 400

    def test_malformed_body_is_400(self, client):
        r = client.post("/api/predict", content=b"{not json",
                        headers={"content-type": "application/json"})
        assert r.status_code == 400

    def test_non_numeric_patch_is_400(self, client):
        patch = [[["x"] * 9] * 15] * 15
        assert client.post("/api/predict", json={"patch": patch}).status_code == 400


class TestIntervene:
    def test_noop_matches_predict(self, client):
        pred = client.post("/api/predict", json={"row": 30, "col": 30}).json()
        r = client.post("/api/intervene", json={"concepts": pred["concepts"], "edits": {}})
        assert r.status_code == 200
        doc = r.json()
        check_schema("intervene", doc)
        assert doc["label"] == pred["label"]
        assert np.allclose(doc["logits"], pred["concept_path_logits"])

    def test_edit_changes_inputs(self, client):
        base = np.full(33, 0.5)
        a = client.post("/api/intervene", json={"concepts": base.tolist(), "edits": {}}).json()
        b = client.post("/api/intervene",
                        json={"concepts": base.tolist(), "edits": {"0": 1.0, "27": 0.0}}).json()
        assert not np.allclose(a["logits"], b["logits"])

    def test_out_of_range_index_is_400(self, client):
        r = client.post("/api/intervene",
                        json={"concepts": [0.5] * 33, "edits": {"99": 0.5}})
        assert r.status_code == 400

    def test_out_of_range_value_is_400(self, client):
        r = client.post("/api/intervene",
                        json={"concepts": [0.5] * 33, "edits": {"3": 1.5}})
        assert r.status_code == 400

    def test_wrong_length_is_400(self, client):
        r = client.post("/api/intervene", json={"concepts": [0.5] * 10, "edits": {}})
        assert r.status_code == 400


class TestDecompose:
    def test_water_pixel_is_surface_dominated(self, client):
        # (20, 20) sits inside the Water region of the stock layout
        r = client.post("/api/decompose", json={"row": 20, "col": 20})
        assert r.status_code == 200
        doc = r.json()
        check_schema("decompose", doc)
        assert doc["ps"] == max(doc["ps"], doc["pd"], doc["pv"])
        assert doc["ps"] + doc["pd"] + doc["pv"] == pytest.approx(1.0, abs=1e-9)

    def test_border_pixel_is_400(self, client):
        assert client.post("/api/decompose", json={"row": 0, "col": 3}).status_code == 400


class TestFormulasAndRouting:
    def test_formulas_cached(self, client):
        r = client.get("/api/formulas")
        assert r.status_code == 200
        doc = r.json()
        check_schema("formulas", doc)
        assert len(doc["classes"]) == 6
        assert all(c["text"] for c in doc["classes"])
        # second call returns the cached document
        assert client.get("/api/formulas").json() == doc

    def test_unknown_route_is_404(self, client):
        assert client.get("/api/nope").status_code == 404

    def test_identical_requests_identical_responses(self, client):
        a = client.post("/api/predict", json={"row": 25, "col": 40}).json()
        b = client.post("/api/predict", json={"row": 25, "col": 40}).json()
        assert a == b

    def test_static_ui_mount(self, fixture_model, small_scene, tmp_path):
        (tmp_path / "index.html").write_text("<!doctype html><title>ui</title>")
        ui_client = TestClient(create_app(fixture_model, small_scene, ui_dir=str(tmp_path)))
        r = ui_client.get("/")
        assert r.status_code == 200
        assert "ui" in r.text
        # API routes take precedence over the static mount
        assert ui_client.get("/api/info").status_code == 200
