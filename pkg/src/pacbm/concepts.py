"""Fixed polarimetric concept vocabulary and the rules that populate it.

The vocabulary has 33 concepts in 9 groups. Within every group a ground
truth vector carries at most one active concept, except the scattering
dominance block, where each of the three mechanisms (surface, double
bounce, volume) carries exactly one of its three states
(dominant / secondary / weak).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .decomposition import CloudePottierResult, FreemanDurdenResult, HuynenParams
from .polarimetry import CovarianceDiagnostics

N_CONCEPTS = 33

MECHANISMS = ("surface", "double-bounce", "volume")
DOMINANCE_STATES = ("dominant", "secondary", "weak")

# Dominance thresholds: the strongest mechanism is "dominant" only when it
# holds at least 40% of the power and leads the runner-up by 10 points;
# any other mechanism is "secondary" when it reaches half the maximum.
DOMINANT_MIN_SHARE = 0.4
DOMINANT_MIN_GAP = 0.1
SECONDARY_FRACTION = 0.5

# Regularity (A0/B0 power ratio) and symmetry (|F|+|G| vs trace) cut points.
REGULARITY_HIGH = 2.0
REGULARITY_LOW = 0.5
SYMMETRY_HIGH = 0.1
SYMMETRY_MEDIUM = 0.3

_DOMINANCE_NAMES = {
    ("surface", "dominant"): "Surface scattering dominant",
    ("surface", "secondary"): "Secondary surface scattering",
    ("surface", "weak"): "Weak surface scattering",
    ("double-bounce", "dominant"): "Double-bounce scattering dominant",
    ("double-bounce", "secondary"): "Secondary double-bounce scattering",
    ("double-bounce", "weak"): "Weak double-bounce scattering",
    ("volume", "dominant"): "Volume scattering dominant",
    ("volume", "secondary"): "Secondary volume scattering",
    ("volume", "weak"): "Weak volume scattering",
}

# (group, name) pairs; the order is normative and serialized with models.
VOCABULARY: tuple[tuple[str, str], ...] = tuple(
    [("scattering-dominance", _DOMINANCE_NAMES[(m, s)]) for m in MECHANISMS for s in DOMINANCE_STATES]
    + [
        ("polarization-mode", "Horizontal polarization dominant"),
        ("polarization-mode", "Vertical polarization dominant"),
        ("polarization-mode", "Cross polarization dominant"),
        ("degree-of-polarization", "Low degree of polarization"),
        ("degree-of-polarization", "Medium degree of polarization"),
        ("degree-of-polarization", "High degree of polarization"),
        ("entropy", "Low polarization entropy"),
        ("entropy", "Medium polarization entropy"),
        ("entropy", "High polarization entropy"),
        ("anisotropy", "Low anisotropy"),
        ("anisotropy", "Medium anisotropy"),
        ("anisotropy", "High anisotropy"),
        ("scattering-angle", "Small scattering angle"),
        ("scattering-angle", "Medium scattering angle"),
        ("scattering-angle", "Large scattering angle"),
        ("regularity", "Highly regular target"),
        ("regularity", "Regular and irregular parts equivalent"),
        ("regularity", "Irregular target"),
        ("scattering-power", "Low scattering power"),
        ("scattering-power", "Medium scattering power"),
        ("scattering-power", "High scattering power"),
        ("symmetry", "High symmetry"),
        ("symmetry", "Medium symmetry"),
        ("symmetry", "Asymmetric"),
    ]
)

GROUPS: tuple[str, ...] = tuple(dict.fromkeys(g for g, _ in VOCABULARY))

assert len(VOCABULARY) == N_CONCEPTS
assert len({name for _, name in VOCABULARY}) == N_CONCEPTS


def concept_index(name: str) -> int:
    for i, (_, n) in enumerate(VOCABULARY):
        if n == name:
            return i
    raise KeyError(name)


def group_slices() -> dict[str, list[int]]:
    """Concept indices per group, in vocabulary order."""
    out: dict[str, list[int]] = {g: [] for g in GROUPS}
    for i, (g, _) in enumerate(VOCABULARY):
        out[g].append(i)
    return out


def validate_ground_truth(vec: np.ndarray) -> None:
    """Enforce the group-exclusivity rules on a binary concept vector."""
    vec = np.asarray(vec)
    if vec.shape != (N_CONCEPTS,):
        raise ValueError(f"concept vector must have length {N_CONCEPTS}")
    if not np.all((vec == 0.0) | (vec == 1.0)):
        raise ValueError("ground-truth concept vector must be binary")
    for mech in range(3):
        block = vec[3 * mech:3 * mech + 3]
        if block.sum() != 1:
            raise ValueError(f"{MECHANISMS[mech]} must have exactly one dominance state")
    for g, idx in group_slices().items():
        if g == "scattering-dominance":
            continue
        if vec[idx].sum() > 1:
            raise ValueError(f"group {g} has more than one active concept")


def dominance_labels(proportions) -> tuple[str, str, str]:
    """Classify three power proportions as dominant / secondary / weak.

    Ties for the maximum are broken in the fixed mechanism order
    surface > double-bounce > volume.
    """
    p = np.asarray(proportions, dtype=np.float64)
    if p.shape != (3,) or p.min() < 0.0 or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"proportions must be a 3-simplex point, got {proportions}")
    imax = int(np.argmax(p))  # argmax keeps the first (= fixed tie order)
    p_second = float(np.max(np.delete(p, imax)))
    out = ["", "", ""]
    if p[imax] >= DOMINANT_MIN_SHARE and p[imax] - p_second >= DOMINANT_MIN_GAP:
        out[imax] = "dominant"
    else:
        out[imax] = "secondary"
    for i in range(3):
        if i == imax:
            continue
        out[i] = "secondary" if p[i] >= SECONDARY_FRACTION * p[imax] else "weak"
    return tuple(out)


def tertile_bin(x: float, lo: float, hi: float) -> str:
    """Equal-interval three-way binning of x over [lo, hi].

    x is clamped into the range first. Boundaries belong to the upper
    bin: [lo, lo+r) -> low, [lo+r, lo+2r) -> middle, [lo+2r, hi] -> high.
    """
    if not lo < hi:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    x = min(max(float(x), lo), hi)
    r = (hi - lo) / 3.0
    if x < lo + r:
        return "low"
    if x < lo + 2.0 * r:
        return "middle"
    return "high"


def degree_of_polarization(t: np.ndarray) -> float:
    """3-D polarimetric purity sqrt((3 Tr(T^2)/Tr(T)^2 - 1)/2).

    1 for a rank-1 (fully polarized) matrix, 0 for T proportional to the
    identity (fully depolarized).
    """
    t = np.asarray(t, dtype=complex)
    trace = float(np.real(np.trace(t)))
    if trace <= 0.0:
        raise ValueError("zero-trace coherency matrix")
    tr2 = float(np.real(np.trace(t @ t)))
    val = (3.0 * tr2 / trace ** 2 - 1.0) / 2.0
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


def _purity_from_lambdas(lambdas) -> float:
    lam = np.asarray(lambdas, dtype=np.float64)
    s1 = lam.sum()
    if s1 <= 0.0:
        raise ValueError("zero-trace coherency matrix")
    val = (3.0 * float((lam ** 2).sum()) / s1 ** 2 - 1.0) / 2.0
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


POLARIZATION_MODES = ("horizontal", "vertical", "cross")


@dataclasses.dataclass(frozen=True)
class DerivedScalars:
    """Per-target scalars the rules below bin into concepts."""

    dop: float               # polarimetric purity in [0, 1]
    pol_mode: str            # strongest channel of (p_hh, p_vv, 2 p_hv)
    regularity_ratio: float  # A0 / B0 power ratio, inf when B0 == 0
    asymmetry: float         # (|F| + |G|) normalized by half the span


def derived_scalars(
    cp: CloudePottierResult, hy: HuynenParams, diag: CovarianceDiagnostics
) -> DerivedScalars:
    mode = int(np.argmax([diag.p_hh, diag.p_vv, 2.0 * diag.p_hv]))
    span = float(sum(cp.lambdas))
    return DerivedScalars(
        dop=_purity_from_lambdas(cp.lambdas),
        pol_mode=POLARIZATION_MODES[mode],
        regularity_ratio=hy.a0 / hy.b0 if hy.b0 > 0.0 else float("inf"),
        asymmetry=(abs(hy.f) + abs(hy.g)) / (span / 2.0) if span > 0.0 else 0.0,
    )


def build_concepts(
    cp: CloudePottierResult,
    fd: FreemanDurdenResult,
    hy: HuynenParams,
    diag: CovarianceDiagnostics,
    span_terciles: tuple[float, float],
) -> np.ndarray:
    """Binary 33-concept vector from the decomposition outputs of one target.

    span_terciles are the two scene-level cut points (lower, upper) of
    the span distribution used for the scattering-power group.
    """
    vec = np.zeros(N_CONCEPTS, dtype=np.float64)

    total = fd.ps + fd.pd + fd.pv
    if total <= 0.0:
        props = np.array([1.0, 0.0, 0.0])  # degenerate: call it all surface
    else:
        props = np.array([fd.ps, fd.pd, fd.pv]) / total
    states = dominance_labels(props)
    for mech, state in enumerate(states):
        vec[3 * mech + DOMINANCE_STATES.index(state)] = 1.0

    ds = derived_scalars(cp, hy, diag)
    vec[9 + POLARIZATION_MODES.index(ds.pol_mode)] = 1.0

    bins = ("low", "middle", "high")
    vec[12 + bins.index(tertile_bin(ds.dop, 0.0, 1.0))] = 1.0
    vec[15 + bins.index(tertile_bin(cp.entropy, 0.0, 1.0))] = 1.0
    vec[18 + bins.index(tertile_bin(cp.anisotropy, 0.0, 1.0))] = 1.0
    vec[21 + bins.index(tertile_bin(cp.alpha_bar, 0.0, 90.0))] = 1.0

    # regularity: power ratio of the smooth (A0) and rough (B0) target parts
    ratio = ds.regularity_ratio
    reg = 0 if ratio >= REGULARITY_HIGH else (1 if ratio >= REGULARITY_LOW else 2)
    vec[24 + reg] = 1.0

    span = float(sum(cp.lambdas))
    lo_cut, hi_cut = span_terciles
    if not lo_cut < hi_cut:
        raise ValueError("span terciles must be increasing")
    power = 0 if span < lo_cut else (1 if span < hi_cut else 2)
    vec[27 + power] = 1.0

    sym = 0 if ds.asymmetry < SYMMETRY_HIGH else (1 if ds.asymmetry < SYMMETRY_MEDIUM else 2)
    vec[30 + sym] = 1.0

    validate_ground_truth(vec)
    return vec


@dataclasses.dataclass
class ClassConceptTable:
    """One binary concept vector per class, in class-index order."""

    class_names: list[str]
    vectors: np.ndarray  # (C, 33) binary

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.shape != (len(self.class_names), N_CONCEPTS):
            raise ValueError("table shape does not match class list")
        for row in self.vectors:
            validate_ground_truth(row)

    def to_jsonable(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "vectors": [[int(v) for v in row] for row in self.vectors],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "ClassConceptTable":
        return cls(class_names=list(obj["class_names"]), vectors=np.array(obj["vectors"], dtype=np.float64))


def concepts_for_class(table: ClassConceptTable, y: int) -> np.ndarray:
    """Ground-truth concept vector of class y (class-level supervision)."""
    if not 0 <= int(y) < len(table.class_names):
        raise ValueError(f"unknown class index {y}")
    return table.vectors[int(y)].copy()
