"""Z-score standardization followed by the exponential first-quadrant map.

Statistics are fitted on training rows only and reused verbatim on any
other rows, so held-out data never leaks into ``mu``/``sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import DegenerateColumnError, DimensionError, NumericOverflowError

B_MODES = ("zero", "raw_mean", "a_times_raw_mean", "custom")


@dataclass(frozen=True)
class TransformParams:
    mu: np.ndarray
    sigma: np.ndarray
    a: float = 1.0
    b: np.ndarray | None = None
    b_mode: str = "zero"

    def __post_init__(self):
        for arr in (self.mu, self.sigma, self.b):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.mu.shape[0]

    def with_warp(self, a: float, b_mode: str = "zero", b=None) -> "TransformParams":
        """Attach the quadrant-map parameters; ``mu`` doubles as the raw column mean."""
        return replace(self, a=float(a), b=resolve_b(b_mode, a, self.mu, b), b_mode=b_mode)

    def apply(self, X) -> np.ndarray:
        b = self.b if self.b is not None else np.zeros(self.n_features)
        return quadrant_map(standardize(X, self), self.a, b)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "a": self.a,
            "b": None if self.b is None else self.b.tolist(),
            "b_mode": self.b_mode,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TransformParams":
        b = doc.get("b")
        return cls(
            mu=np.asarray(doc["mu"], dtype=np.float64),
            sigma=np.asarray(doc["sigma"], dtype=np.float64),
            a=float(doc["a"]),
            b=None if b is None else np.asarray(b, dtype=np.float64),
            b_mode=doc["b_mode"],
        )


def fit_standardizer(X_train) -> TransformParams:
    """Column means and sample (ddof=1) standard deviations of the training rows."""
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError(
            f"n_samples={X.shape[0]}; need at least 2 rows to estimate a standard deviation"
        )
    mu = X.mean(axis=0)
    sigma = X.std(axis=0, ddof=1)
    for k, s in enumerate(sigma):
        if not s > 0:
            raise DegenerateColumnError(f"column {k} is constant; cannot standardize")
    return TransformParams(mu=mu, sigma=sigma)


def standardize(X, params: TransformParams) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise DimensionError(
            f"expected {params.n_features} columns, got shape {X.shape}"
        )
    return (X - params.mu) / params.sigma


def unstandardize(Z, params: TransformParams) -> np.ndarray:
    return np.asarray(Z, dtype=np.float64) * params.sigma + params.mu


def quadrant_map(Z, a: float, b) -> np.ndarray:
    """Elementwise ``exp(a * z + b_k)``; strictly positive output."""
    Z = np.asarray(Z, dtype=np.float64)
    b = np.broadcast_to(np.asarray(b, dtype=np.float64), (Z.shape[-1],))
    with np.errstate(over="ignore"):
        out = np.exp(a * Z + b)
    bad = ~np.isfinite(out)
    if bad.any():
        col = int(np.argwhere(bad)[0][-1])
        raise NumericOverflowError(
            f"quadrant map overflowed in column {col}; reduce a or b"
        )
    return out


def resolve_b(b_mode: str, a: float, raw_means, custom=None) -> np.ndarray:
    """Per-column warp offsets for the given mode.

    ``raw_means`` are the training-column means *before* standardization.
    """
    raw_means = np.asarray(raw_means, dtype=np.float64)
    if b_mode == "zero":
        return np.zeros_like(raw_means)
    if b_mode == "raw_mean":
        return raw_means.copy()
    if b_mode == "a_times_raw_mean":
        return a * raw_means
    if b_mode == "custom":
        if custom is None:
            raise ValueError("b_mode='custom' requires an explicit b vector")
        b = np.asarray(custom, dtype=np.float64).ravel()
        if b.shape != raw_means.shape:
            raise DimensionError(
                f"custom b has length {b.shape[0]}, expected {raw_means.shape[0]}"
            )
        return b
    raise ValueError(f"unknown b_mode {b_mode!r}; expected one of {B_MODES}")


class FirstQuadrantTransformer(TransformerMixin, BaseEstimator):
    """Standardize columns, then warp them into the positive orthant.

    Parameters
    ----------
    a : float
        Shared warp scale.
    b_mode : {'zero', 'raw_mean', 'a_times_raw_mean', 'custom'}
        How per-column offsets are derived from the raw training means.
    b : array-like, optional
        Offsets used when ``b_mode='custom'``.
    """

    def __init__(self, a=1.0, b_mode="zero", b=None):
        self.a = a
        self.b_mode = b_mode
        self.b = b

    def fit(self, X, y=None):
        X = validate_data(self, X)
        self.params_ = fit_standardizer(X).with_warp(self.a, self.b_mode, self.b)
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        return self.params_.apply(validate_data(self, X, reset=False))
