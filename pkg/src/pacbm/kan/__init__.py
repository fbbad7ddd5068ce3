from .bspline import BSplineGrid, bspline_basis, bspline_basis_and_derivative
from .network import KanEdge, KanLayer, KanNetwork, edge_eval, kan_init
from .optim import Adam
from .regressor import KanRegressor
from .symbolic import SymbolicFormula, extract_formulas, render_formula

__all__ = [
    "Adam",
    "BSplineGrid",
    "KanEdge",
    "KanLayer",
    "KanNetwork",
    "KanRegressor",
    "SymbolicFormula",
    "bspline_basis",
    "bspline_basis_and_derivative",
    "edge_eval",
    "extract_formulas",
    "kan_init",
    "render_formula",
]
