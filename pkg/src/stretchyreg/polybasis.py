"""Full multivariate polynomial basis and design-matrix expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import DimensionError, NumericOverflowError, TermCountOverflowError

#: Largest term count we accept (signed 64-bit, the numpy index type).
MAX_TERMS = np.iinfo(np.int64).max

ORDERING = "graded_lex"


def count_terms(d: int, r: int) -> int:
    """Number of monomials in ``d`` variables of total degree at most ``r``.

    Equals ``C(d + r, r)``. Raises :class:`TermCountOverflowError` when the
    count does not fit a signed 64-bit integer.
    """
    d, r = int(d), int(r)
    if d < 1:
        raise ValueError(f"input dimension must be >= 1, got {d}")
    if r < 0:
        raise ValueError(f"polynomial order must be >= 0, got {r}")
    n = math.comb(d + r, r)
    if n > MAX_TERMS:
        raise TermCountOverflowError(
            f"term count C({d}+{r}, {r}) exceeds the int64 range"
        )
    return n


def _compositions(total: int, parts: int):
    # ascending lexicographic order of (n_1, ..., n_parts) summing to total
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class MonomialBasis:
    """Ordered exponent vectors of a full polynomial of order ``r`` in ``d`` inputs."""

    d: int
    r: int
    exponents: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        self.exponents.setflags(write=False)

    def __len__(self) -> int:
        return self.exponents.shape[0]

    @property
    def n_terms(self) -> int:
        return len(self)

    @property
    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    def term_names(self, feature_names=None) -> list[str]:
        """Human-readable monomial names such as ``"1"`` or ``"x1^2*x2"``."""
        if feature_names is None:
            feature_names = [f"x{k + 1}" for k in range(self.d)]
        names = []
        for row in self.exponents:
            parts = [
                name if n == 1 else f"{name}^{n}"
                for name, n in zip(feature_names, row)
                if n > 0
            ]
            names.append("*".join(parts) if parts else "1")
        return names


def enumerate_basis(d: int, r: int) -> MonomialBasis:
    """All exponent vectors with total degree <= r, in graded lexicographic order.

    Degrees ascend; within a degree, vectors are compared as tuples. For
    ``d=2, r=2`` this gives ``(0,0), (0,1), (1,0), (0,2), (1,1), (2,0)``.
    """
    n = count_terms(d, r)
    exps = np.empty((n, d), dtype=np.int64)
    i = 0
    for k in range(r + 1):
        for comp in _compositions(k, d):
            exps[i] = comp
            i += 1
    return MonomialBasis(d=int(d), r=int(r), exponents=exps)


def expand(X, basis: MonomialBasis) -> np.ndarray:
    """Evaluate every monomial of ``basis`` on the rows of ``X``.

    Entry ``(i, j)`` is ``prod_k X[i, k] ** n_k(j)`` with ``0 ** 0 == 1``.
    Returns the ``M x D`` design matrix, intercept column first.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != basis.d:
        raise DimensionError(
            f"expected a 2-D array with {basis.d} columns, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    M = X.shape[0]
    # powers[k, n, i] = X[i, k] ** n
    powers = np.empty((basis.d, basis.r + 1, M))
    powers[:, 0, :] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, basis.r + 1):
            powers[:, n, :] = powers[:, n - 1, :] * X.T
        P = np.ones((len(basis), M))
        for k in range(basis.d):
            P *= powers[k, basis.exponents[:, k], :]
    P = np.ascontiguousarray(P.T)
    bad = ~np.isfinite(P)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise NumericOverflowError(
            f"design matrix entry overflowed at row {row}, column {col} "
            f"(exponents {tuple(basis.exponents[col])})"
        )
    return P


class PolynomialExpansion(TransformerMixin, BaseEstimator):
    """Scikit-learn transformer wrapping :func:`enumerate_basis` and :func:`expand`.

    Parameters
    ----------
    order : int
        Maximum total degree ``r``. The intercept column is always included.
    """

    def __init__(self, order=1):
        self.order = order

    def fit(self, X, y=None):
        X = validate_data(self, X)
        self.basis_ = enumerate_basis(X.shape[1], self.order)
        self.n_output_features_ = len(self.basis_)
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = validate_data(self, X, reset=False)
        return expand(X, self.basis_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "basis_")
        return np.asarray(self.basis_.term_names(input_features), dtype=object)
