"""Scene raster container, patch extraction and the PSCENE v1 directory format.

PSCENE v1 is a three-file directory:
  meta.json     UTF-8 JSON (width, height, looks, seed, class names,
                prototype descriptors, version "1")
  features.f32  raw little-endian float32, row-major H x W x 9
  labels.u8     raw bytes H x W, 255 = unlabeled

The byte layout is normative; scenes written with identical inputs are
byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

UNLABELED = 255
PATCH_SIZE = 15
PATCH_HALF = PATCH_SIZE // 2

META_FILE = "meta.json"
FEATURES_FILE = "features.f32"
LABELS_FILE = "labels.u8"


@dataclasses.dataclass
class Scene:
    """H x W raster of 9-dim coherency features plus a label map."""

    features: np.ndarray  # (H, W, 9) float64
    labels: np.ndarray    # (H, W) uint8, 255 = unlabeled
    meta: dict

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.features.ndim != 3 or self.features.shape[2] != 9:
            raise ValueError(f"features must be (H, W, 9), got {self.features.shape}")
        if self.labels.shape != self.features.shape[:2]:
            raise ValueError("labels shape does not match features")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("scene features must be finite")
        n_classes = len(self.class_names)
        lab = self.labels[self.labels != UNLABELED]
        if lab.size and int(lab.max()) >= n_classes:
            raise ValueError("label index out of range for class list")

    @property
    def height(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    @property
    def class_names(self) -> list[str]:
        return list(self.meta.get("class_names", []))


@dataclasses.dataclass(frozen=True)
class Patch:
    data: np.ndarray          # (size, size, 9)
    anchor: tuple[int, int]   # (row, col) of the center pixel
    label: int | None = None


def valid_anchor(scene: Scene, row: int, col: int, size: int = PATCH_SIZE) -> bool:
    half = size // 2
    return (half <= row < scene.height - half) and (half <= col < scene.width - half)


def extract_patch(scene: Scene, row: int, col: int, size: int = PATCH_SIZE) -> Patch:
    """Window of `size` x `size` pixels centered on (row, col).

    Anchors closer than size//2 to any border are rejected rather than
    padded: padding would corrupt the local polarimetric statistics.
    """
    if not valid_anchor(scene, row, col, size):
        raise ValueError(f"border anchor ({row}, {col}) for {size}x{size} patch")
    half = size // 2
    data = scene.features[row - half:row + half + 1, col - half:col + half + 1].copy()
    lab = int(scene.labels[row, col])
    return Patch(data=data, anchor=(row, col), label=None if lab == UNLABELED else lab)


def pauli_rgb(scene: Scene) -> np.ndarray:
    """Pauli false-color composite: R=T22, G=T33, B=T11.

    Each channel goes through 10*log10, is clipped to its 2nd..98th
    percentile and scaled to 0..255. Display-only.
    """
    powers = scene.features[:, :, [1, 2, 0]]  # T22, T33, T11
    db = 10.0 * np.log10(np.maximum(powers, 1e-30))
    out = np.empty(db.shape, dtype=np.uint8)
    for c in range(3):
        ch = db[:, :, c]
        lo, hi = np.percentile(ch, [2.0, 98.0])
        if hi <= lo:
            out[:, :, c] = 0
        else:
            out[:, :, c] = np.round(255.0 * (np.clip(ch, lo, hi) - lo) / (hi - lo)).astype(np.uint8)
    return out


def save_scene(scene: Scene, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(scene.meta)
    meta["version"] = "1"
    meta["width"] = scene.width
    meta["height"] = scene.height
    (out / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    (out / FEATURES_FILE).write_bytes(
        scene.features.astype("<f4").tobytes(order="C")
    )
    (out / LABELS_FILE).write_bytes(scene.labels.astype(np.uint8).tobytes(order="C"))


def load_scene(in_dir: str | Path) -> Scene:
    src = Path(in_dir)
    try:
        meta = json.loads((src / META_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FileNotFoundError(f"{src} is not a PSCENE directory (missing {META_FILE})")
    if str(meta.get("version")) != "1":
        raise ValueError(f"unsupported PSCENE version {meta.get('version')!r}")
    h, w = int(meta["height"]), int(meta["width"])
    feat = np.frombuffer((src / FEATURES_FILE).read_bytes(), dtype="<f4")
    if feat.size != h * w * 9:
        raise ValueError("features.f32 size does not match meta dimensions")
    labels = np.frombuffer((src / LABELS_FILE).read_bytes(), dtype=np.uint8)
    if labels.size != h * w:
        raise ValueError("labels.u8 size does not match meta dimensions")
    return Scene(
        features=feat.astype(np.float64).reshape(h, w, 9),
        labels=labels.reshape(h, w).copy(),
        meta=meta,
    )
