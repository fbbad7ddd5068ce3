"""Synthetic multilook PolSAR scene generation.

Class prototypes are convex mixtures of three canonical unit-trace
coherency matrices (surface-like, double-bounce-like, random volume),
scaled to a per-class span. Pixels are sampled from the complex Wishart
multilook statistics of their region's prototype using a counter-based
RNG keyed on (seed, pixel), so generation is deterministic and
independent of iteration schedule.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import concepts
from .concepts import ClassConceptTable, build_concepts
from .decomposition import cloude_pottier, freeman_durden, huynen
from .polarimetry import covariance_diagnostics, features9_to_t, t_to_features9
from .scene import PATCH_SIZE, UNLABELED, Scene

# Fraction of span jitter applied uniformly per region.
REGION_SPAN_JITTER = 0.10

_REGION_STREAM_BASE = 1 << 63  # pixel stream ids stay below this


def _rank1_from_pauli(k) -> np.ndarray:
    k = np.asarray(k, dtype=complex)
    k = k / np.linalg.norm(k)
    return np.outer(k, k.conj())


def canonical_components() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-trace canonical coherency matrices (surface, double, volume)."""
    t_surf = _rank1_from_pauli([1.0, 0.3, 0.0])
    t_dbl = _rank1_from_pauli([0.3, 1.0, 0.0])
    t_vol = np.diag([2.0, 1.0, 1.0]).astype(complex) / 4.0
    return t_surf, t_dbl, t_vol


@dataclasses.dataclass
class ClassPrototype:
    name: str
    weights: tuple[float, float, float]  # (surface, double, volume) mixture
    span_scale: float
    t_prototype: np.ndarray              # (3, 3), trace == span_scale
    concept_vector: np.ndarray           # (33,) binary, computed not asserted

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "weights": [float(w) for w in self.weights],
            "span_scale": float(self.span_scale),
            "t9": [float(x) for x in t_to_features9(self.t_prototype)],
            "concepts": [int(v) for v in self.concept_vector],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "ClassPrototype":
        return cls(
            name=str(obj["name"]),
            weights=tuple(float(w) for w in obj["weights"]),
            span_scale=float(obj["span_scale"]),
            t_prototype=features9_to_t(np.array(obj["t9"], dtype=np.float64)),
            concept_vector=np.array(obj["concepts"], dtype=np.float64),
        )


DEFAULT_CLASS_WEIGHTS = {
    "Water": (0.90, 0.05, 0.05),
    "Mountain": (0.20, 0.20, 0.60),
    "Vegetation": (0.38, 0.28, 0.34),
    "High-Density Urban": (0.50, 0.30, 0.20),
    "Low-Density Urban": (0.38, 0.34, 0.28),
    "Developed": (0.25, 0.45, 0.30),
}
DEFAULT_SPAN_SCALES = (1.0, 0.3, 0.4, 1.5, 2.5, 3.0)


def prototype_span_terciles(span_scales) -> tuple[float, float]:
    """Scattering-power cut points: empirical terciles of the class spans."""
    q = np.quantile(np.asarray(span_scales, dtype=np.float64), [1.0 / 3.0, 2.0 / 3.0])
    return float(q[0]), float(q[1])


def _prototype_concepts(t: np.ndarray, span_terciles: tuple[float, float]) -> np.ndarray:
    return build_concepts(
        cloude_pottier(t),
        freeman_durden(covariance_diagnostics(t)),
        huynen(t),
        covariance_diagnostics(t),
        span_terciles,
    )


def default_prototypes() -> list[ClassPrototype]:
    """The six stock classes with their designed scattering mixtures.

    Mixture weights and span scales are design inputs; each concept
    vector is computed by running the decomposition pipeline on the
    noise-free prototype, never asserted. Construction fails if two
    classes end up with identical concept vectors.
    """
    t_surf, t_dbl, t_vol = canonical_components()
    terciles = prototype_span_terciles(DEFAULT_SPAN_SCALES)
    protos: list[ClassPrototype] = []
    for (name, (ws, wd, wv)), scale in zip(DEFAULT_CLASS_WEIGHTS.items(), DEFAULT_SPAN_SCALES):
        t_unit = ws * t_surf + wd * t_dbl + wv * t_vol
        t = t_unit * scale
        protos.append(
            ClassPrototype(
                name=name,
                weights=(ws, wd, wv),
                span_scale=scale,
                t_prototype=t,
                concept_vector=_prototype_concepts(t, terciles),
            )
        )
    for i in range(len(protos)):
        for j in range(i + 1, len(protos)):
            if np.array_equal(protos[i].concept_vector, protos[j].concept_vector):
                raise ValueError(
                    f"classes {protos[i].name!r} and {protos[j].name!r} "
                    "produce identical concept vectors"
                )
    return protos


def class_table_from_prototypes(protos: list[ClassPrototype]) -> ClassConceptTable:
    return ClassConceptTable(
        class_names=[p.name for p in protos],
        vectors=np.stack([p.concept_vector for p in protos]),
    )


def _psd_factor(t: np.ndarray) -> np.ndarray:
    """A with A A^H = t for Hermitian PSD t; raises on a non-PSD input."""
    t = np.asarray(t, dtype=complex)
    w, v = np.linalg.eigh(t)
    trace = float(np.real(np.trace(t)))
    if w.min() < -1e-9 * max(trace, 1.0):
        raise np.linalg.LinAlgError(f"matrix is not PSD (min eigenvalue {w.min()})")
    return v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


def sample_wishart(t: np.ndarray, looks: int, rng: np.random.Generator) -> np.ndarray:
    """One multilook coherency draw: average of `looks` rank-1 outer products.

    Each look is A z with A A^H = t and z a standard circular complex
    Gaussian 3-vector, so the expectation of the draw is t itself.
    """
    if looks < 1:
        raise ValueError("looks must be >= 1")
    a = _psd_factor(t)
    g = rng.standard_normal((looks, 3, 2))
    z = (g[:, :, 0] + 1j * g[:, :, 1]) / np.sqrt(2.0)
    k = z @ a.T
    out = np.einsum("ni,nj->ij", k, k.conj()) / looks
    return 0.5 * (out + out.conj().T)


@dataclasses.dataclass(frozen=True)
class Region:
    class_index: int
    row0: int
    col0: int
    height: int
    width: int


@dataclasses.dataclass
class SceneSpec:
    width: int
    height: int
    looks: int
    seed: int
    prototypes: list[ClassPrototype]
    layout: list[Region]

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dimensions must be positive")
        if self.looks < 1:
            raise ValueError("looks must be >= 1")
        used = set()
        for r in self.layout:
            if not (0 <= r.row0 and r.row0 + r.height <= self.height
                    and 0 <= r.col0 and r.col0 + r.width <= self.width):
                raise ValueError(f"region {r} exceeds scene bounds")
            if not 0 <= r.class_index < len(self.prototypes):
                raise ValueError(f"region {r} references unknown class")
            used.add(r.class_index)
        if used != set(range(len(self.prototypes))):
            raise ValueError("every class must be used by at least one region")

    def to_jsonable(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "looks": self.looks,
            "seed": self.seed,
            "prototypes": [p.to_jsonable() for p in self.prototypes],
            "layout": [
                {
                    "class_index": r.class_index,
                    "row0": r.row0,
                    "col0": r.col0,
                    "height": r.height,
                    "width": r.width,
                }
                for r in self.layout
            ],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "SceneSpec":
        return cls(
            width=int(obj["width"]),
            height=int(obj["height"]),
            looks=int(obj["looks"]),
            seed=int(obj["seed"]),
            prototypes=[ClassPrototype.from_jsonable(p) for p in obj["prototypes"]],
            layout=[
                Region(
                    class_index=int(r["class_index"]),
                    row0=int(r["row0"]),
                    col0=int(r["col0"]),
                    height=int(r["height"]),
                    width=int(r["width"]),
                )
                for r in obj["layout"]
            ],
        )


def default_scene_spec(seed: int = 42, looks: int = 8,
                       region_size: int = 192) -> SceneSpec:
    """Stock 6-class scene: a 2 x 3 grid of square class regions."""
    protos = default_prototypes()
    layout = [
        Region(class_index=i, row0=region_size * (i // 3),
               col0=region_size * (i % 3), height=region_size, width=region_size)
        for i in range(6)
    ]
    return SceneSpec(
        width=3 * region_size,
        height=2 * region_size,
        looks=looks,
        seed=seed,
        prototypes=protos,
        layout=layout,
    )


def _pixel_rng(seed: int, pixel_id: int) -> np.random.Generator:
    key = np.array([seed, pixel_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_scene(spec: SceneSpec) -> Scene:
    """Sample a full scene from the spec; deterministic given the seed.

    Each pixel draws from its own counter-based RNG stream keyed on
    (seed, row * width + col); each region applies a seeded uniform span
    jitter so power bins stay non-degenerate.
    """
    spec.validate()
    seed = int(spec.seed) & (2**64 - 1)
    h, w = spec.height, spec.width
    features = np.zeros((h, w, 9), dtype=np.float64)
    labels = np.full((h, w), UNLABELED, dtype=np.uint8)

    for ridx, region in enumerate(spec.layout):
        jit_rng = _pixel_rng(seed, _REGION_STREAM_BASE + ridx)
        jitter = 1.0 + REGION_SPAN_JITTER * (2.0 * jit_rng.uniform() - 1.0)
        proto = spec.prototypes[region.class_index]
        t_region = proto.t_prototype * jitter
        a = _psd_factor(t_region)
        at = a.T.copy()
        for r in range(region.row0, region.row0 + region.height):
            for c in range(region.col0, region.col0 + region.width):
                rng = _pixel_rng(seed, r * w + c)
                g = rng.standard_normal((spec.looks, 3, 2))
                z = (g[:, :, 0] + 1j * g[:, :, 1]) / np.sqrt(2.0)
                k = z @ at
                t = np.einsum("ni,nj->ij", k, k.conj()) / spec.looks
                features[r, c] = t_to_features9(0.5 * (t + t.conj().T))
                labels[r, c] = region.class_index

    meta = {
        "version": "1",
        "width": w,
        "height": h,
        "looks": spec.looks,
        "seed": spec.seed,
        "class_names": [p.name for p in spec.prototypes],
        "prototypes": [p.to_jsonable() for p in spec.prototypes],
    }
    return Scene(features=features, labels=labels, meta=meta)


def prototypes_from_scene(scene: Scene) -> list[ClassPrototype]:
    return [ClassPrototype.from_jsonable(p) for p in scene.meta["prototypes"]]


# Frobenius norm weights for the 9-vector representation (off-diagonal
# entries appear twice in the matrix).
_FROB_W = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0])


def nearest_prototype_accuracy(scene: Scene, patch_size: int = PATCH_SIZE) -> float:
    """Separability oracle: nearest-prototype accuracy over patch means.

    For every labeled anchor whose patch fits the scene, the coherency
    matrix averaged over the patch (the classifier's receptive field) is
    matched to the closest class prototype in Frobenius distance. Run
    before any training to confirm the scene is separable at all.
    """
    protos = prototypes_from_scene(scene)
    proto9 = np.stack([t_to_features9(p.t_prototype) for p in protos])
    half = patch_size // 2
    # patch means via 2-D prefix sums per channel
    cum = np.cumsum(np.cumsum(scene.features, axis=0), axis=1)
    pad = np.zeros((scene.height + 1, scene.width + 1, 9))
    pad[1:, 1:] = cum
    r0 = np.arange(0, scene.height - patch_size + 1)
    c0 = np.arange(0, scene.width - patch_size + 1)
    sums = (
        pad[np.ix_(r0 + patch_size, c0 + patch_size)]
        - pad[np.ix_(r0, c0 + patch_size)]
        - pad[np.ix_(r0 + patch_size, c0)]
        + pad[np.ix_(r0, c0)]
    )
    means = sums / (patch_size * patch_size)
    anchors_lab = scene.labels[half:scene.height - half, half:scene.width - half]
    mask = anchors_lab != UNLABELED
    diffs = means[:, :, None, :] - proto9[None, None, :, :]
    d2 = np.einsum("rwkc,c,rwkc->rwk", diffs, _FROB_W, diffs)
    pred = np.argmin(d2, axis=2)
    return float(np.mean(pred[mask] == anchors_lab[mask]))
