"""Fitted predictor, evaluation metrics, and the JSON model document."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import jsonschema
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import DimensionError, EmptyInputError, ModelFormatError
from .polybasis import ORDERING, MonomialBasis, enumerate_basis, expand
from .stretchy import SolverConfig, solve_detailed
from .transform import B_MODES, TransformParams, fit_standardizer

SCHEMA_VERSION = 1
DEFAULT_SPARSITY_EPS = 1e-3

_NUM_ARRAY = {"type": "array", "items": {"type": "number"}}
MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "transform", "basis", "solver", "alpha", "provenance"],
    "properties": {
        "schema_version": {"type": "integer"},
        "transform": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["mu", "sigma", "a", "b", "b_mode"],
                    "properties": {
                        "mu": _NUM_ARRAY,
                        "sigma": _NUM_ARRAY,
                        "a": {"type": "number"},
                        "b": {"oneOf": [{"type": "null"}, _NUM_ARRAY]},
                        "b_mode": {"enum": list(B_MODES)},
                    },
                },
            ]
        },
        "basis": {
            "type": "object",
            "required": ["d", "r", "ordering"],
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "r": {"type": "integer", "minimum": 0},
                "ordering": {"const": ORDERING},
            },
        },
        "solver": {
            "type": "object",
            "required": ["q", "lambda", "mode"],
            "properties": {
                "q": {"type": "number"},
                "lambda": {"type": "number", "minimum": 0},
                "mode": {"enum": ["auto", "primal", "dual"]},
            },
        },
        "alpha": _NUM_ARRAY,
        "provenance": {"type": "object"},
    },
}


@dataclass(frozen=True)
class StretchyModel:
    """Everything needed to turn raw input rows into predictions.

    ``transform`` is ``None`` when the inputs are already strictly positive
    and are fed to the polynomial basis unchanged.
    """

    basis: MonomialBasis
    solver: SolverConfig
    alpha: np.ndarray
    transform: TransformParams | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.shape != (len(self.basis),):
            raise ModelFormatError(
                f"alpha has {alpha.size} entries but the basis has {len(self.basis)} terms"
            )
        if not np.all(np.isfinite(alpha)):
            raise ModelFormatError("alpha contains non-finite values")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        if self.transform is not None and self.transform.n_features != self.basis.d:
            raise ModelFormatError("transform and basis disagree on the input dimension")

    @property
    def n_features(self) -> int:
        return self.basis.d

    def design_matrix(self, X_raw) -> np.ndarray:
        X = np.asarray(X_raw, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.basis.d:
            raise DimensionError(
                f"model expects {self.basis.d} features, got {X.shape[1]}"
            )
        if self.transform is not None:
            X = self.transform.apply(X)
        return expand(X, self.basis)

    def predict(self, X_raw) -> np.ndarray:
        return self.design_matrix(X_raw) @ self.alpha


def predict(model: StretchyModel, X_raw) -> np.ndarray:
    return model.predict(X_raw)


def fit_model(X, y, order=1, q=2.0, lam=0.0, mode="auto", transform=True,
              a=1.0, b_mode="zero", b=None, provenance=None):
    """Fit transform, basis, and coefficients on training rows.

    Returns ``(model, info)`` where ``info`` holds the solver path taken,
    the gram condition estimate, and the problem size.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"X shape {X.shape} incompatible with y length {y.shape[0]}")
    if X.shape[0] == 0:
        raise EmptyInputError("no training rows")
    cfg = SolverConfig(q=q, lam=lam, mode=mode)
    params = fit_standardizer(X).with_warp(a, b_mode, b) if transform else None
    Z = params.apply(X) if params is not None else X
    basis = enumerate_basis(X.shape[1], order)
    P = expand(Z, basis)
    res = solve_detailed(P, y, cfg)
    prov = {"n_samples": int(X.shape[0]),
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    prov.update(provenance or {})
    model = StretchyModel(basis=basis, solver=cfg, alpha=res.alpha,
                          transform=params, provenance=prov)
    info = {"M": int(P.shape[0]), "D": int(P.shape[1]),
            "solver_mode": res.mode, "condition": res.condition}
    return model, info


@dataclass(frozen=True)
class ClassifierConfig:
    tau: float = 0.0
    labels: tuple = (-1, 1)

    def __post_init__(self):
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise ValueError(f"labels must be two distinct values, got {self.labels}")


def classify(scores, cfg: ClassifierConfig = ClassifierConfig()) -> np.ndarray:
    """Positive label where ``score >= tau``, negative label otherwise."""
    scores = np.asarray(scores, dtype=np.float64)
    neg, pos = cfg.labels
    return np.where(scores >= cfg.tau, pos, neg)


@dataclass(frozen=True)
class EvalReport:
    mse: float
    std_err: float
    n: int
    residuals: np.ndarray = field(repr=False)
    nnz: int
    resid_std: float = math.nan

    def to_dict(self, include_residuals=False) -> dict:
        out = {"mse": self.mse, "std_err": self.std_err, "resid_std": self.resid_std,
               "n": self.n, "nnz": self.nnz}
        if include_residuals:
            out["residuals"] = self.residuals.tolist()
        return out


def score_residuals(y_pred, y_true, alpha=None, sparsity_eps=DEFAULT_SPARSITY_EPS) -> EvalReport:
    """MSE and the standard error of the squared residuals.

    ``std_err`` is the sample standard deviation of the squared residuals
    divided by ``sqrt(N)``; ``resid_std`` is the plain sample standard
    deviation of the residuals, kept for comparison.
    """
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    if y_pred.shape != y_true.shape:
        raise DimensionError(f"{y_pred.size} predictions for {y_true.size} targets")
    n = y_true.size
    if n == 0:
        raise EmptyInputError("cannot evaluate on an empty set")
    resid = y_pred - y_true
    sq = resid ** 2
    if n > 1:
        std_err = float(np.std(sq, ddof=1) / math.sqrt(n))
        resid_std = float(np.std(resid, ddof=1))
    else:
        std_err = resid_std = 0.0
    nnz = -1 if alpha is None else int(np.sum(np.abs(alpha) > sparsity_eps))
    return EvalReport(mse=float(sq.mean()), std_err=std_err, n=n, residuals=resid,
                      nnz=nnz, resid_std=resid_std)


def evaluate(model: StretchyModel, X_raw, y, sparsity_eps=DEFAULT_SPARSITY_EPS) -> EvalReport:
    X_raw = np.asarray(X_raw, dtype=np.float64)
    if X_raw.size == 0:
        raise EmptyInputError("cannot evaluate on an empty set")
    return score_residuals(model.predict(X_raw), y, model.alpha, sparsity_eps)


# serialization


def model_to_dict(model: StretchyModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "transform": None if model.transform is None else model.transform.to_dict(),
        "basis": {"d": model.basis.d, "r": model.basis.r, "ordering": ORDERING},
        "solver": {"q": model.solver.q, "lambda": model.solver.lam, "mode": model.solver.mode},
        "alpha": model.alpha.tolist(),
        "provenance": dict(model.provenance),
    }


def model_from_dict(doc) -> StretchyModel:
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelFormatError(f"invalid model document: {exc.message}") from None
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelFormatError(
            f"unsupported schema_version {doc['schema_version']} (expected {SCHEMA_VERSION})"
        )
    basis = enumerate_basis(doc["basis"]["d"], doc["basis"]["r"])
    solver = doc["solver"]
    try:
        cfg = SolverConfig(q=solver["q"], lam=solver["lambda"], mode=solver["mode"])
    except ValueError as exc:
        raise ModelFormatError(f"invalid solver block: {exc}") from None
    transform = None if doc["transform"] is None else TransformParams.from_dict(doc["transform"])
    return StretchyModel(basis=basis, solver=cfg, alpha=np.asarray(doc["alpha"], dtype=np.float64),
                         transform=transform, provenance=doc["provenance"])


def save_model(model: StretchyModel, path) -> None:
    # float repr is the shortest string that round-trips exactly
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_model(path) -> StretchyModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"cannot parse model file {path}: {exc}") from None
    return model_from_dict(doc)


class StretchyRegressor(RegressorMixin, BaseEstimator):
    """Full-polynomial stretchy regression with a scikit-learn interface.

    Parameters
    ----------
    order : int, default=1
        Polynomial order ``r`` of the full multivariate expansion.
    q : float, default=2.0
        Stretch parameter. ``q=2`` is ridge regression; values approaching
        1 shrink more coefficients toward zero. ``q=1`` is invalid.
    lam : float, default=0.0
        Regularization weight added to the diagonal of the stretched gram.
    mode : {'auto', 'primal', 'dual'}, default='auto'
        ``auto`` picks the dual form when there are fewer samples than terms.
    warp : bool, default=True
        Standardize and warp inputs into the positive orthant before
        expansion. Disable only for inputs that are already positive.
    a, b_mode, b :
        Warp scale and offsets, see :class:`FirstQuadrantTransformer`.

    Attributes
    ----------
    model_ : StretchyModel
    coef_ : ndarray of shape (n_terms,)
        Coefficients aligned with ``basis_``; ``coef_[0]`` is the intercept.
    basis_ : MonomialBasis
    solver_mode_ : str
    condition_ : float
        Condition estimate of the solved gram.
    """

    def __init__(self, order=1, q=2.0, lam=0.0, mode="auto", warp=True,
                 a=1.0, b_mode="zero", b=None):
        self.order = order
        self.q = q
        self.lam = lam
        self.mode = mode
        self.warp = warp
        self.a = a
        self.b_mode = b_mode
        self.b = b

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        self.model_, info = fit_model(
            X, y, order=self.order, q=self.q, lam=self.lam, mode=self.mode,
            transform=self.warp, a=self.a, b_mode=self.b_mode, b=self.b,
        )
        self.coef_ = np.array(self.model_.alpha)
        self.basis_ = self.model_.basis
        self.solver_mode_ = info["solver_mode"]
        self.condition_ = info["condition"]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, reset=False)
        return self.model_.predict(X)

    def evaluate(self, X, y, sparsity_eps=DEFAULT_SPARSITY_EPS) -> EvalReport:
        check_is_fitted(self, "model_")
        return evaluate(self.model_, validate_data(self, X, reset=False), y, sparsity_eps)
