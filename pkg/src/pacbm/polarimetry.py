"""Core polarimetric data types and representation changes.

Everything here is pure 64-bit float/complex math on small fixed-size
objects: scattering matrices, Pauli vectors, 3x3 coherency matrices and
the lexicographic power diagnostics derived from them.
"""

from __future__ import annotations

import dataclasses

import numpy as np

# Tolerances used when validating coherency matrices.
HERMITIAN_ATOL = 1e-12
DIAGONAL_FLOOR = -1e-12
EIGENVALUE_FLOOR_REL = 1e-9


@dataclasses.dataclass(frozen=True)
class ScatteringMatrix:
    """Single-look scattering matrix under reciprocity (s_vh == s_hv)."""

    s_hh: complex
    s_hv: complex
    s_vv: complex

    def __post_init__(self):
        for name in ("s_hh", "s_hv", "s_vv"):
            v = complex(getattr(self, name))
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite, got {v!r}")


@dataclasses.dataclass(frozen=True)
class PauliVector:
    k1: complex
    k2: complex
    k3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3], dtype=complex)

    def norm_sq(self) -> float:
        return float(abs(self.k1) ** 2 + abs(self.k2) ** 2 + abs(self.k3) ** 2)


@dataclasses.dataclass(frozen=True)
class CovarianceDiagnostics:
    """Lexicographic second moments recovered from the Pauli basis.

    p_hh = <|S_hh|^2>, p_vv = <|S_vv|^2>, p_hv = <|S_hv|^2>,
    c_hhvv = <S_hh S_vv*>.
    """

    p_hh: float
    p_vv: float
    p_hv: float
    c_hhvv: complex

    def __post_init__(self):
        if min(self.p_hh, self.p_vv, self.p_hv) < -1e-12:
            raise ValueError("negative power in covariance diagnostics")
        # Cauchy-Schwarz with a small absolute slack
        if abs(self.c_hhvv) ** 2 > self.p_hh * self.p_vv + 1e-9:
            raise ValueError("c_hhvv violates Cauchy-Schwarz bound")


def span(s: ScatteringMatrix) -> float:
    """Total scattered power |S_hh|^2 + 2|S_hv|^2 + |S_vv|^2."""
    return float(abs(s.s_hh) ** 2 + 2.0 * abs(s.s_hv) ** 2 + abs(s.s_vv) ** 2)


def pauli_vector(s: ScatteringMatrix) -> PauliVector:
    """Pauli target vector k = (S_hh+S_vv, S_hh-S_vv, 2 S_hv)/sqrt(2)."""
    r = 1.0 / np.sqrt(2.0)
    return PauliVector(
        k1=(s.s_hh + s.s_vv) * r,
        k2=(s.s_hh - s.s_vv) * r,
        k3=2.0 * s.s_hv * r,
    )


def validate_coherency(t: np.ndarray, *, name: str = "T") -> np.ndarray:
    """Check the coherency-matrix invariants and return t as complex128.

    Raises ValueError when t is not (numerically) Hermitian PSD.
    """
    t = np.asarray(t, dtype=complex)
    if t.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got shape {t.shape}")
    if not np.all(np.isfinite(t.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    if not np.allclose(t, t.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
        raise ValueError(f"{name} is not Hermitian within {HERMITIAN_ATOL}")
    diag = np.real(np.diag(t))
    if diag.min() < DIAGONAL_FLOOR:
        raise ValueError(f"{name} has a negative diagonal entry {diag.min()}")
    trace = float(diag.sum())
    w = np.linalg.eigvalsh(t)
    if w.min() < -EIGENVALUE_FLOOR_REL * max(trace, 1.0):
        raise ValueError(f"{name} is not PSD (min eigenvalue {w.min()})")
    return t


def coherency_multilook(ks: list[PauliVector] | np.ndarray) -> np.ndarray:
    """Multilook coherency matrix T = (1/n) sum_i k_i k_i^H.

    Accepts a list of PauliVector or an (n, 3) complex array of looks.
    """
    if isinstance(ks, np.ndarray):
        arr = np.asarray(ks, dtype=complex)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("look array must have shape (n, 3)")
    else:
        if len(ks) == 0:
            raise ValueError("no looks")
        arr = np.stack([k.as_array() for k in ks])
    if arr.shape[0] == 0:
        raise ValueError("no looks")
    t = np.einsum("ni,nj->ij", arr, arr.conj()) / arr.shape[0]
    # force exact Hermitian symmetry against floating noise
    return 0.5 * (t + t.conj().T)


def covariance_diagnostics(t: np.ndarray) -> CovarianceDiagnostics:
    """Lexicographic moments from a coherency matrix (basis change)."""
    t = np.asarray(t, dtype=complex)
    t11 = t[0, 0].real
    t22 = t[1, 1].real
    re12 = t[0, 1].real
    im12 = t[0, 1].imag
    return CovarianceDiagnostics(
        p_hh=(t11 + t22 + 2.0 * re12) / 2.0,
        p_vv=(t11 + t22 - 2.0 * re12) / 2.0,
        p_hv=t[2, 2].real / 2.0,
        c_hhvv=((t11 - t22) - 2j * im12) / 2.0,
    )


# Fixed channel order of the 9-dim real representation:
# T11, T22, T33, Re T12, Im T12, Re T13, Im T13, Re T23, Im T23.
FEATURE_NAMES = (
    "t11", "t22", "t33",
    "re_t12", "im_t12",
    "re_t13", "im_t13",
    "re_t23", "im_t23",
)


def t_to_features9(t: np.ndarray) -> np.ndarray:
    """Flatten a coherency matrix into the canonical 9-vector."""
    t = np.asarray(t, dtype=complex)
    return np.array(
        [
            t[0, 0].real, t[1, 1].real, t[2, 2].real,
            t[0, 1].real, t[0, 1].imag,
            t[0, 2].real, t[0, 2].imag,
            t[1, 2].real, t[1, 2].imag,
        ],
        dtype=np.float64,
    )


def features9_to_t(v: np.ndarray) -> np.ndarray:
    """Inverse of t_to_features9; Hermitian by construction."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (9,):
        raise ValueError(f"expected a 9-vector, got shape {v.shape}")
    t = np.empty((3, 3), dtype=complex)
    t[0, 0] = v[0]
    t[1, 1] = v[1]
    t[2, 2] = v[2]
    t[0, 1] = complex(v[3], v[4])
    t[1, 0] = complex(v[3], -v[4])
    t[0, 2] = complex(v[5], v[6])
    t[2, 0] = complex(v[5], -v[6])
    t[1, 2] = complex(v[7], v[8])
    t[2, 1] = complex(v[7], -v[8])
    return t
