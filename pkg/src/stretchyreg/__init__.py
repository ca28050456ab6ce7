"""Stretchy polynomial regression.

Full multivariate polynomial features with closed-form primal and dual
estimators whose gram matrices are stretched by an elementwise power
``1/(q-1)``, plus an exponential map that keeps inputs positive.
"""

__version__ = "0.1.0"

from .datasets import Dataset, load_delimited, load_prostate, split, synthetic_three_points
from .exceptions import StretchyError
from .model import (
    ClassifierConfig,
    EvalReport,
    StretchyModel,
    StretchyRegressor,
    classify,
    evaluate,
    fit_model,
    load_model,
    predict,
    save_model,
)
from .polybasis import MonomialBasis, PolynomialExpansion, count_terms, enumerate_basis, expand
from .stretchy import (
    SolverConfig,
    contour_grid,
    elementwise_power,
    lp_norm,
    qspace_measure,
    qtilde_measure,
    solve,
    solve_dual,
    solve_primal,
    stretch_exponent,
)
from .transform import (
    FirstQuadrantTransformer,
    TransformParams,
    fit_standardizer,
    quadrant_map,
    resolve_b,
    standardize,
)
