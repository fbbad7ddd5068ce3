import numpy as np
import pytest


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {'PASS' if report.passed else 'FAIL'}")

from pacbm.model.checkpoint import save_model
from pacbm.model.training import TrainConfig, build_datasets, train_joint
from pacbm.scene import save_scene
from pacbm.synth import default_scene_spec, generate_scene


@pytest.fixture(scope="session")
def default_scene():
    """The stock 6-class scene (seed 42, 8 looks); ~10 s to build, shared."""
    return generate_scene(default_scene_spec(seed=42, looks=8))


@pytest.fixture(scope="session")
def small_scene():
    """A reduced 6-class scene for fast training tests."""
    return generate_scene(default_scene_spec(seed=11, looks=8, region_size=48))


@pytest.fixture(scope="session")
def small_splits(small_scene):
    return build_datasets(small_scene, seed=17, train_per_class=250, val_per_class=80)


@pytest.fixture(scope="session")
def fixture_model(small_splits):
    """A quickly but properly trained joint model shared by app-level tests."""
    train_ds, _, mean, std = small_splits
    cfg = TrainConfig(strategy="joint", lam=0.7, epochs=30, batch_size=256,
                      lr=0.003, seed=7)
    return train_joint(train_ds, cfg, norm=(mean, std))


@pytest.fixture(scope="session")
def artifacts_dir(tmp_path_factory, small_scene, fixture_model):
    """Scene directory + checkpoint on disk for CLI / server tests."""
    root = tmp_path_factory.mktemp("artifacts")
    save_scene(small_scene, root / "scene")
    save_model(fixture_model, root / "model.json")
    return root
