"""Closed-form readout of a trained spline network.

Every edge function is matched against a small primitive library by a
coarse grid search over the inner affine (a, b) with a closed-form
least-squares solve for the outer (scale, offset); the best-R2 primitive
wins. Edge formulas then compose into per-output formulas: a one-layer
network composes exactly as a sum over input terms, deeper networks
substitute each hidden node's formula into the terms of the next layer.
The formula never replaces the network; it is a description with a
recorded per-edge R2.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .network import KanNetwork, edge_eval

AFFINE_GRID_LIMIT = 5.0
AFFINE_GRID_STEPS = 101
DROP_RANGE_FRACTION = 1e-2
_MIN_RECIP_DISTANCE = 1e-2  # 1/x rejected when the affine range crosses ~0

# name -> (function, domain predicate on u, parity for sign canonicalization)
PRIMITIVES: dict = {
    "x": (lambda u: u, None, "odd"),
    "x^2": (lambda u: u**2, None, "even"),
    "x^3": (lambda u: u**3, None, "odd"),
    "sin": (np.sin, None, "odd"),
    "cos": (np.cos, None, "even"),
    "exp": (np.exp, None, None),
    "log": (np.log, lambda u: np.min(u, axis=-1) > 0.0, None),
    "1/x": (lambda u: 1.0 / u, lambda u: np.min(np.abs(u), axis=-1) > _MIN_RECIP_DISTANCE, "odd"),
    "sqrt": (lambda u: np.sqrt(np.maximum(u, 0.0)), lambda u: np.min(u, axis=-1) >= 0.0, None),
}


@dataclasses.dataclass
class EdgeFit:
    primitive: str
    a: float
    b: float
    scale: float
    offset: float
    r2: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        f = PRIMITIVES[self.primitive][0]
        return self.scale * f(self.a * np.asarray(x, dtype=np.float64) + self.b) + self.offset


@dataclasses.dataclass
class FormulaTerm:
    """scale * primitive(a * arg + b); arg is an input index or a nested formula."""

    scale: float
    primitive: str
    a: float
    b: float
    arg: "int | SymbolicFormula"

    def to_jsonable(self) -> dict:
        arg = self.arg.to_jsonable() if isinstance(self.arg, SymbolicFormula) else int(self.arg)
        return {"scale": self.scale, "primitive": self.primitive,
                "a": self.a, "b": self.b, "arg": arg}


@dataclasses.dataclass
class SymbolicFormula:
    """Sum of terms plus a constant, describing one network output."""

    terms: list[FormulaTerm]
    constant: float
    edge_r2: list[float]  # fit quality of every edge that fed this output

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        out = np.full(x.shape[0], self.constant, dtype=np.float64)
        for t in self.terms:
            arg = x[:, t.arg] if isinstance(t.arg, int) else t.arg.evaluate(x)
            out += t.scale * PRIMITIVES[t.primitive][0](t.a * arg + t.b)
        return out

    def to_jsonable(self) -> dict:
        return {
            "terms": [t.to_jsonable() for t in self.terms],
            "constant": self.constant,
            "edge_r2": list(self.edge_r2),
        }


def _affine_grid() -> tuple[np.ndarray, np.ndarray]:
    g = np.linspace(-AFFINE_GRID_LIMIT, AFFINE_GRID_LIMIT, AFFINE_GRID_STEPS)
    aa, bb = np.meshgrid(g, g, indexing="ij")
    return aa.ravel(), bb.ravel()


def _exact_fit(name: str, a: float, b: float, xs: np.ndarray, ys: np.ndarray,
               ss_y: float) -> EdgeFit:
    """Float64 closed-form (scale, offset) at a fixed primitive and affine."""
    func, _, parity = PRIMITIVES[name]
    with np.errstate(all="ignore"):
        f = func(a * xs + b)
    f_mean = f.mean()
    var_f = float(np.sum((f - f_mean) ** 2))
    y_mean = ys.mean()
    if var_f <= 1e-30:
        return EdgeFit(primitive=name, a=a, b=b, scale=0.0, offset=float(y_mean), r2=0.0)
    cov = float(np.dot(f - f_mean, ys - y_mean))
    c = cov / var_f
    d = y_mean - c * f_mean
    r2 = cov * cov / var_f / ss_y
    if a < 0.0 and parity is not None:
        a, b = -a, -b
        if parity == "odd":
            c = -c
    return EdgeFit(primitive=name, a=a, b=b, scale=float(c), offset=float(d), r2=float(r2))


def fit_edges_shared_input(xs: np.ndarray, ys: np.ndarray) -> list[EdgeFit]:
    """Fit c*f(a*x+b)+d for several edges that share the same input samples.

    ys has one column per edge. The (a, b) grid search runs in float32
    (it only has to rank candidates); the winning candidate per edge is
    re-solved in float64.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim == 1:
        ys = ys[:, None]
    n, n_edges = ys.shape
    y_mean = ys.mean(axis=0)
    yc = ys - y_mean
    ss_y = np.einsum("nm,nm->m", yc, yc)
    live = ss_y > 1e-30

    # float32 pass ranks (a, b) candidates *within* each primitive family;
    # the per-family winners are then re-solved and compared in float64,
    # because near-ties across primitives (e.g. cos vs x^2 on a parabola)
    # sit below float32 resolution.
    aa, bb = _affine_grid()
    u = (aa[:, None] * xs[None, :] + bb[:, None]).astype(np.float32)
    yc32 = yc.astype(np.float32)
    candidates: dict[str, np.ndarray] = {}  # primitive -> best grid index per edge
    with np.errstate(all="ignore"):
        for name, (func, domain, _) in PRIMITIVES.items():
            valid = domain(u) if domain is not None else None
            if valid is not None and not np.any(valid):
                continue
            f = func(u)
            f_sum = f.sum(axis=1)
            var_f = np.einsum("ij,ij->i", f, f) - f_sum * f_sum / n
            cov = f @ yc32  # yc is centered, so f needs no centering
            ok = var_f > 1e-12
            if valid is not None:
                ok &= valid
            if not np.any(ok):
                continue
            safe_var = np.where(ok, var_f, 1.0)
            score = np.where(ok[:, None], cov**2 / safe_var[:, None], -np.inf)
            candidates[name] = np.argmax(score, axis=0)

    out: list[EdgeFit] = []
    for m in range(n_edges):
        if not live[m]:  # constant edge
            out.append(EdgeFit(primitive="x", a=0.0, b=0.0, scale=0.0,
                               offset=float(y_mean[m]), r2=1.0))
            continue
        best: EdgeFit | None = None
        for name, idx in candidates.items():
            i = int(idx[m])
            if PRIMITIVES[name][1] is not None and not bool(
                PRIMITIVES[name][1](u[i][None, :])
            ):
                continue
            fit = _exact_fit(name, float(aa[i]), float(bb[i]), xs, ys[:, m], float(ss_y[m]))
            if best is None or fit.r2 > best.r2:
                best = fit
        assert best is not None  # "x" always has valid domain and variance
        out.append(best)
    return out


def fit_edge_primitive(xs: np.ndarray, ys: np.ndarray) -> EdgeFit:
    """Best c*f(a*x+b)+d over the primitive library for samples (xs, ys)."""
    return fit_edges_shared_input(xs, np.asarray(ys, dtype=np.float64))[0]


def _drop_negligible(entries: list[tuple[FormulaTerm, float, float]]) -> tuple[list[FormulaTerm], float]:
    """Keep terms whose output range matters; fold the rest into the constant."""
    if not entries:
        return [], 0.0
    max_range = max(rng for _, rng, _ in entries)
    threshold = DROP_RANGE_FRACTION * max_range
    kept: list[FormulaTerm] = []
    constant = 0.0
    for term, rng, mean in entries:
        if max_range > 0.0 and rng >= threshold:
            kept.append(term)
        else:
            constant += mean  # a flat term is just its mean value
    return kept, constant


def extract_formulas(net: KanNetwork, sample_inputs: np.ndarray,
                     max_samples: int = 256) -> list[SymbolicFormula]:
    """One SymbolicFormula per network output, fitted on the sample inputs.

    The samples must cover the input region the formula should describe;
    at most max_samples rows are used (uniform deterministic subsample).
    """
    x = np.asarray(sample_inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] > max_samples:
        idx = np.linspace(0, x.shape[0] - 1, max_samples).astype(int)
        x = x[idx]

    # activations entering each layer
    acts = [x]
    for layer in net.layers:
        acts.append(layer.forward(acts[-1]))

    # layer_formulas[q] = formula for node q of the current layer's output
    layer_formulas: list[SymbolicFormula] | None = None
    for li, layer in enumerate(net.layers):
        xin = acts[li]
        # fit all edges hanging off one input dimension in a single pass
        fits: list[list[EdgeFit]] = []
        for p in range(layer.n_in):
            xs = xin[:, p]
            ys = np.stack(
                [edge_eval(xs, layer.edge(q, p), layer.grid) for q in range(layer.n_out)],
                axis=1,
            )
            fits.append(fit_edges_shared_input(xs, ys))
        new_formulas: list[SymbolicFormula] = []
        for q in range(layer.n_out):
            entries: list[tuple[FormulaTerm, float, float]] = []
            constant = 0.0
            r2s: list[float] = []
            for p in range(layer.n_in):
                fit = fits[p][q]
                r2s.append(fit.r2)
                constant += fit.offset
                arg: int | SymbolicFormula = p if layer_formulas is None else layer_formulas[p]
                term = FormulaTerm(scale=fit.scale, primitive=fit.primitive,
                                   a=fit.a, b=fit.b, arg=arg)
                vals = fit(xin[:, p]) - fit.offset
                entries.append((term, float(vals.max() - vals.min()), float(vals.mean())))
            kept, folded = _drop_negligible(entries)
            if layer_formulas is not None:
                r2s = [r for f in layer_formulas for r in f.edge_r2] + r2s
            new_formulas.append(SymbolicFormula(terms=kept, constant=constant + folded, edge_r2=r2s))
        layer_formulas = new_formulas
    assert layer_formulas is not None
    return layer_formulas


def _format_arg(term: FormulaTerm, var_names: list[str] | None) -> str:
    if isinstance(term.arg, int):
        name = var_names[term.arg] if var_names else f"x{term.arg + 1}"
    else:
        name = f"({render_formula(term.arg, var_names)})"
    inner = f"{term.a:.3g}*{name}"
    if term.b:
        inner += f" + {term.b:.3g}" if term.b > 0 else f" - {-term.b:.3g}"
    return inner


def render_formula(formula: SymbolicFormula, var_names: list[str] | None = None) -> str:
    """Human-readable right-hand side, e.g. '0.31*sin(0.96*c2 + 8.39) + 0.28'."""
    parts: list[str] = []
    for t in formula.terms:
        inner = _format_arg(t, var_names)
        if t.primitive == "x":
            body = inner if t.a == 1.0 and t.b == 0.0 else f"({inner})"
        elif t.primitive == "x^2":
            body = f"({inner})^2"
        elif t.primitive == "x^3":
            body = f"({inner})^3"
        elif t.primitive == "1/x":
            body = f"1/({inner})"
        else:
            body = f"{t.primitive}({inner})"
        parts.append(f"{t.scale:.3g}*{body}")
    if formula.constant or not parts:
        parts.append(f"{formula.constant:.3g}")
    return " + ".join(parts).replace("+ -", "- ")
