"""Polarimetric target decompositions: eigenvalue, three-component, phenomenological.

All three operate on the 3x3 coherency matrix (or the lexicographic
diagnostics derived from it) and are pure functions.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .polarimetry import CovarianceDiagnostics

LOG3 = np.log(3.0)


@dataclasses.dataclass(frozen=True)
class CloudePottierResult:
    """Eigen-decomposition parameters of the coherency matrix.

    lambdas are sorted descending and clamped to be non-negative; pn are
    the pseudo-probabilities lambda_n / sum(lambda); alphas are per-
    eigenvector scattering angles in degrees.
    """

    lambdas: tuple[float, float, float]
    pn: tuple[float, float, float]
    alphas: tuple[float, float, float]
    entropy: float
    alpha_bar: float
    anisotropy: float


@dataclasses.dataclass(frozen=True)
class FreemanDurdenResult:
    ps: float
    pd: float
    pv: float
    fs: float
    fd: float
    fv: float
    alpha: complex
    beta: complex
    clamped: bool


@dataclasses.dataclass(frozen=True)
class HuynenParams:
    """Nine phenomenological target parameters read off the coherency matrix.

    Field `h` is the target parameter H (coupling of the symmetric and
    asymmetric target parts), not to be confused with entropy.
    """

    a0: float
    b0: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float


def cloude_pottier(t: np.ndarray) -> CloudePottierResult:
    """Entropy / mean alpha / anisotropy from the Hermitian eigenproblem.

    Entropy uses base-3 logarithms with 0*log(0) := 0. Anisotropy is
    defined as 0 when lambda2 + lambda3 vanishes relative to the trace.
    """
    t = np.asarray(t, dtype=complex)
    trace = float(np.real(np.trace(t)))
    if trace <= 0.0:
        raise ValueError("null target: zero-trace coherency matrix")
    w, u = np.linalg.eigh(t)
    order = np.argsort(w)[::-1]
    w = np.clip(w[order], 0.0, None)
    u = u[:, order]
    pn = w / w.sum()
    ent = 0.0
    for p in pn:
        if p > 0.0:
            ent -= p * np.log(p) / LOG3
    alphas = np.degrees(np.arccos(np.clip(np.abs(u[0, :]), 0.0, 1.0)))
    alpha_bar = float(np.dot(pn, alphas))
    lam23 = w[1] + w[2]
    anis = 0.0 if lam23 < 1e-12 * trace else float((w[1] - w[2]) / lam23)
    return CloudePottierResult(
        lambdas=tuple(float(x) for x in w),
        pn=tuple(float(x) for x in pn),
        alphas=tuple(float(x) for x in alphas),
        entropy=float(ent),
        alpha_bar=alpha_bar,
        anisotropy=anis,
    )


def freeman_durden(diag: CovarianceDiagnostics) -> FreemanDurdenResult:
    """Three-component power split of the span.

    Volume power comes straight from the cross-pol channel; the residual
    surface/double system is closed by fixing the model parameter of the
    non-dominant mechanism (alpha = -1 when the residual HH-VV
    correlation has non-negative real part, else beta = 1) and solving
    the three remaining real equations. Negative residual powers are
    clamped to zero and flagged instead of being redistributed.
    """
    fv = 3.0 * diag.p_hv
    pv = 8.0 * fv / 3.0
    a = diag.p_hh - fv
    b = diag.p_vv - fv
    cr = diag.c_hhvv.real - fv / 3.0
    clamped = False
    if a < 0.0:
        a, clamped = 0.0, True
    if b < 0.0:
        b, clamped = 0.0, True
    if cr >= 0.0:
        alpha = complex(-1.0)
        den = a + b + 2.0 * cr
        fs = (cr + b) ** 2 / den if den > 0.0 else 0.0
        fd = b - fs
        beta = complex((a + cr) / (cr + b)) if (cr + b) > 0.0 else complex(0.0)
        if fd < 0.0:
            fd, clamped = 0.0, True
    else:
        beta = complex(1.0)
        den = a + b - 2.0 * cr
        fd = (cr - b) ** 2 / den if den > 0.0 else 0.0
        fs = b - fd
        alpha = complex((a - cr) / (cr - b)) if (cr - b) != 0.0 else complex(0.0)
        if fs < 0.0:
            fs, clamped = 0.0, True
    ps = fs * (1.0 + abs(beta) ** 2)
    pd = fd * (1.0 + abs(alpha) ** 2)
    return FreemanDurdenResult(
        ps=float(ps), pd=float(pd), pv=float(pv),
        fs=float(fs), fd=float(fd), fv=float(fv),
        alpha=alpha, beta=beta, clamped=clamped,
    )


def huynen(t: np.ndarray) -> HuynenParams:
    """Read the nine target parameters off the coherency matrix."""
    t = np.asarray(t, dtype=complex)
    return HuynenParams(
        a0=t[0, 0].real / 2.0,
        b0=(t[1, 1].real + t[2, 2].real) / 2.0,
        b=(t[1, 1].real - t[2, 2].real) / 2.0,
        c=t[0, 1].real,
        d=-t[0, 1].imag,
        e=t[1, 2].real,
        f=t[1, 2].imag,
        g=t[0, 2].imag,
        h=t[0, 2].real,
    )


def huynen_to_t(p: HuynenParams) -> np.ndarray:
    """Rebuild the coherency matrix from the nine parameters (exact inverse)."""
    return np.array(
        [
            [2.0 * p.a0, p.c - 1j * p.d, p.h + 1j * p.g],
            [p.c + 1j * p.d, p.b0 + p.b, p.e + 1j * p.f],
            [p.h - 1j * p.g, p.e - 1j * p.f, p.b0 - p.b],
        ],
        dtype=complex,
    )


def decompose_features(features: np.ndarray) -> dict[str, np.ndarray]:
    """All three decompositions on a (..., 9) feature raster at once.

    Returns float64 maps of the eigenvalue parameters (entropy,
    alpha_bar, anisotropy), the three-component power proportions
    (ps, pd, pv), and the nine phenomenological parameters. Same
    formulas as the per-matrix functions, just batched.
    """
    f = np.asarray(features, dtype=np.float64)
    shape = f.shape[:-1]
    f = f.reshape(-1, 9)
    t = np.zeros((f.shape[0], 3, 3), dtype=complex)
    t[:, 0, 0] = f[:, 0]
    t[:, 1, 1] = f[:, 1]
    t[:, 2, 2] = f[:, 2]
    t[:, 0, 1] = f[:, 3] + 1j * f[:, 4]
    t[:, 1, 0] = f[:, 3] - 1j * f[:, 4]
    t[:, 0, 2] = f[:, 5] + 1j * f[:, 6]
    t[:, 2, 0] = f[:, 5] - 1j * f[:, 6]
    t[:, 1, 2] = f[:, 7] + 1j * f[:, 8]
    t[:, 2, 1] = f[:, 7] - 1j * f[:, 8]

    w, v = np.linalg.eigh(t)
    w = np.clip(w[:, ::-1], 0.0, None)  # descending, non-negative
    v = v[:, :, ::-1]
    trace = w.sum(axis=1)
    safe_trace = np.where(trace > 0, trace, 1.0)
    pn = w / safe_trace[:, None]
    ent = -np.sum(np.where(pn > 0, pn * np.log(np.where(pn > 0, pn, 1.0)), 0.0), axis=1) / LOG3
    alphas = np.degrees(np.arccos(np.clip(np.abs(v[:, 0, :]), 0.0, 1.0)))
    alpha_bar = np.einsum("nk,nk->n", pn, alphas)
    lam23 = w[:, 1] + w[:, 2]
    anis = np.where(lam23 >= 1e-12 * safe_trace, (w[:, 1] - w[:, 2]) / np.where(lam23 > 0, lam23, 1.0), 0.0)
    null = trace <= 0
    ent[null] = 0.0
    alpha_bar[null] = 0.0
    anis[null] = 0.0

    # three-component split from the lexicographic moments
    p_hh = (f[:, 0] + f[:, 1] + 2.0 * f[:, 3]) / 2.0
    p_vv = (f[:, 0] + f[:, 1] - 2.0 * f[:, 3]) / 2.0
    p_hv = f[:, 2] / 2.0
    fv = 3.0 * p_hv
    pv = 8.0 * fv / 3.0
    a = np.maximum(p_hh - fv, 0.0)
    b = np.maximum(p_vv - fv, 0.0)
    cr = (f[:, 0] - f[:, 1]) / 2.0 - fv / 3.0
    surf = cr >= 0.0
    den_a = a + b + 2.0 * cr
    fs_a = np.where(den_a > 0, (cr + b) ** 2 / np.where(den_a > 0, den_a, 1.0), 0.0)
    fd_a = np.maximum(b - fs_a, 0.0)
    beta_a = np.where(cr + b > 0, (a + cr) / np.where(cr + b > 0, cr + b, 1.0), 0.0)
    ps_a = fs_a * (1.0 + beta_a**2)
    pd_a = 2.0 * fd_a
    den_b = a + b - 2.0 * cr
    fd_b = np.where(den_b > 0, (cr - b) ** 2 / np.where(den_b > 0, den_b, 1.0), 0.0)
    fs_b = np.maximum(b - fd_b, 0.0)
    alpha_b = np.where(cr != b, (a - cr) / np.where(cr != b, cr - b, 1.0), 0.0)
    ps_b = 2.0 * fs_b
    pd_b = fd_b * (1.0 + alpha_b**2)
    ps = np.where(surf, ps_a, ps_b)
    pd = np.where(surf, pd_a, pd_b)
    total = ps + pd + pv
    safe_total = np.where(total > 0, total, 1.0)

    out = {
        "entropy": ent,
        "alpha_bar": alpha_bar,
        "anisotropy": anis,
        "ps": ps / safe_total,
        "pd": pd / safe_total,
        "pv": pv / safe_total,
        "huynen_a0": f[:, 0] / 2.0,
        "huynen_b0": (f[:, 1] + f[:, 2]) / 2.0,
        "huynen_b": (f[:, 1] - f[:, 2]) / 2.0,
        "huynen_c": f[:, 3],
        "huynen_d": -f[:, 4],
        "huynen_e": f[:, 7],
        "huynen_f": f[:, 8],
        "huynen_g": f[:, 6],
        "huynen_h": f[:, 5],
    }
    return {k: arr.reshape(shape) for k, arr in out.items()}
