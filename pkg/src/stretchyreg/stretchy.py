"""Closed-form stretchy estimators and the shrinkage-space measures.

Both solvers raise the transposed design matrix elementwise to the power
``e = 1/(q-1)`` before forming the gram matrix:

    dual   alpha = Q (P Q + lam I_M)^-1 y
    primal alpha = (Q P + lam I_D)^-1 Q y         with Q = (P^T)**e

At ``q = 2`` (``e = 1``) these are the usual dual and primal ridge
solutions. The stretched gram is not symmetric for ``q != 2``, so systems
are solved with a column-pivoted QR factorization after exact power-of-two
row/column equilibration; the conditioning guard looks at the equilibrated
matrix, since feature offsets rescale gram rows and columns by many orders
of magnitude without making the system any harder to solve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    DimensionError,
    DomainError,
    NumericOverflowError,
    SingularExponentError,
    SingularSystemError,
)

MODES = ("auto", "primal", "dual")

#: Smallest permitted ``|q - 1|``.
MIN_Q_GAP = 1e-6
COND_WARN = 1e12
COND_ERROR = 1e15


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    q: float = 2.0
    lam: float = 0.0
    mode: str = "auto"

    def __post_init__(self):
        stretch_exponent(self.q)
        if not self.lam >= 0:
            raise ValueError(f"regularization weight must be >= 0, got {self.lam}")
        if self.mode not in MODES:
            raise ValueError(f"unknown solver mode {self.mode!r}; expected one of {MODES}")

    @property
    def exponent(self) -> float:
        return stretch_exponent(self.q)


@dataclass(frozen=True)
class SolveResult:
    alpha: np.ndarray
    mode: str
    condition: float


def stretch_exponent(q: float) -> float:
    q = float(q)
    if not np.isfinite(q):
        raise DomainError(f"q must be finite, got {q}")
    if abs(q - 1.0) < MIN_Q_GAP:
        raise SingularExponentError(
            f"q={q!r} is within {MIN_Q_GAP:g} of 1; the exponent 1/(q-1) is undefined"
        )
    return 1.0 / (q - 1.0)


def elementwise_power(A, e: float) -> np.ndarray:
    """Entrywise ``A ** e`` with explicit domain and overflow checks."""
    A = np.asarray(A, dtype=np.float64)
    e = float(e)
    if e == 1.0:
        return A.copy()
    if not e.is_integer() and np.any(A < 0):
        raise DomainError(
            f"fractional power {e:g} of a negative entry; "
            "map inputs into the first quadrant first"
        )
    if e < 0 and np.any(A == 0):
        raise DomainError(f"negative power {e:g} of a zero entry")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = np.power(A, e)
    bad = ~np.isfinite(out)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NumericOverflowError(
            f"elementwise power {e:g} overflowed at index {idx} (value {A[idx]:g})"
        )
    return out


def _equilibrate(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # power-of-two row then column scales, so scaling itself is exact
    with np.errstate(divide="ignore"):
        r = np.exp2(-np.round(np.log2(np.max(np.abs(G), axis=1))))
        c = np.exp2(-np.round(np.log2(np.max(np.abs(G * r[:, None]), axis=0))))
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c))):
        raise SingularSystemError("stretched gram has an all-zero row or column")
    return r, c


def equilibrated_condition(G) -> float:
    """2-norm condition number of ``G`` after row/column equilibration."""
    G = np.asarray(G, dtype=np.float64)
    r, c = _equilibrate(G)
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.linalg.cond(G * r[:, None] * c[None, :]))


def _solve_square(G: np.ndarray, rhs: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
    r, c = _equilibrate(G)
    Gs = G * r[:, None] * c[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        cond = float(np.linalg.cond(Gs))
    if not np.isfinite(cond) or cond > COND_ERROR:
        if lam == 0:
            raise SingularSystemError(
                f"stretched gram is singular or ill-conditioned (cond ~ {cond:.3g}); "
                "use a regularization weight lam > 0"
            )
        warnings.warn(f"stretched gram condition ~ {cond:.3g}", IllConditionedWarning, stacklevel=3)
    elif cond > COND_WARN:
        warnings.warn(f"stretched gram condition ~ {cond:.3g}", IllConditionedWarning, stacklevel=3)
    Qf, R, piv = scipy.linalg.qr(Gs, pivoting=True)
    if np.any(np.diag(R) == 0):
        raise SingularSystemError("stretched gram is exactly singular; use lam > 0")
    z = scipy.linalg.solve_triangular(R, Qf.T @ (r * rhs))
    x = np.empty_like(z)
    x[piv] = z
    x *= c
    if not np.all(np.isfinite(x)):
        raise NumericOverflowError("linear solve produced non-finite values")
    return x, cond


def _check(P, y):
    P = np.asarray(P, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if P.ndim != 2:
        raise DimensionError(f"design matrix must be 2-D, got shape {P.shape}")
    if P.shape[0] != y.shape[0]:
        raise DimensionError(f"design matrix has {P.shape[0]} rows but y has {y.shape[0]}")
    return P, y


def _solve_dual(P, y, cfg: SolverConfig) -> SolveResult:
    P, y = _check(P, y)
    Q = elementwise_power(P.T, cfg.exponent)
    G = P @ Q
    if cfg.lam:
        G[np.diag_indices_from(G)] += cfg.lam
    beta, cond = _solve_square(G, y, cfg.lam)
    return SolveResult(Q @ beta, "dual", cond)


def _solve_primal(P, y, cfg: SolverConfig) -> SolveResult:
    P, y = _check(P, y)
    Q = elementwise_power(P.T, cfg.exponent)
    G = Q @ P
    if cfg.lam:
        G[np.diag_indices_from(G)] += cfg.lam
    alpha, cond = _solve_square(G, Q @ y, cfg.lam)
    return SolveResult(alpha, "primal", cond)


def solve_dual(P, y, cfg: SolverConfig) -> np.ndarray:
    """Dual-form stretchy solution; an ``M x M`` system."""
    return _solve_dual(P, y, cfg).alpha


def solve_primal(P, y, cfg: SolverConfig) -> np.ndarray:
    """Primal-form stretchy solution; a ``D x D`` system."""
    return _solve_primal(P, y, cfg).alpha


def resolve_mode(mode: str, n_samples: int, n_terms: int) -> str:
    if mode == "auto":
        return "dual" if n_samples < n_terms else "primal"
    return mode


def solve_detailed(P, y, cfg: SolverConfig) -> SolveResult:
    """Like :func:`solve` but also reports the path taken and the gram condition."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2:
        raise DimensionError(f"design matrix must be 2-D, got shape {P.shape}")
    mode = resolve_mode(cfg.mode, *P.shape)
    return _solve_dual(P, y, cfg) if mode == "dual" else _solve_primal(P, y, cfg)


def solve(P, y, cfg: SolverConfig) -> np.ndarray:
    """Dispatch on ``cfg.mode``; ``auto`` uses the dual form when ``M < D``."""
    return solve_detailed(P, y, cfg).alpha


# shrinkage-space measures


def lp_norm(v, p: float) -> float:
    if not p >= 1:
        raise DomainError(f"p-norm requires p >= 1, got {p}; use qtilde_measure instead")
    v = np.abs(np.asarray(v, dtype=np.float64))
    return float(np.sum(v ** p) ** (1.0 / p))


def qtilde_measure(v, q: float) -> float:
    """``(sum |v_i|**q) ** 0.5``."""
    v = np.abs(np.asarray(v, dtype=np.float64))
    if q < 0 and np.any(v == 0):
        raise DomainError("negative exponent of a zero component")
    return float(np.sum(v ** q) ** 0.5)


def qspace_measure(v, q: float) -> float:
    """``(sum v_i**q) ** 0.5`` without absolute values.

    Not a norm: ``qspace_measure(c * v, q) != |c| * qspace_measure(v, q)`` in
    general. Negative components are only allowed for integer ``q``.
    """
    v = np.asarray(v, dtype=np.float64)
    q = float(q)
    if not q.is_integer() and np.any(v < 0):
        raise DomainError(f"fractional power {q:g} of a negative component")
    if q < 0 and np.any(v == 0):
        raise DomainError("negative exponent of a zero component")
    s = float(np.sum(v ** q))
    if s < 0:
        raise DomainError(f"sum of powers is negative ({s:g}); square root undefined")
    return s ** 0.5


SPACES = {
    "lp": lp_norm,
    "qtilde": qtilde_measure,
    "qspace": qspace_measure,
    "qspace2": lambda v, q: qspace_measure(v, q) ** 2,
}


def contour_grid(space: str, exponent: float, grid_min=-1.0, grid_max=1.0, steps=101) -> np.ndarray:
    """Evaluate a measure on a square 2-D grid for contour plotting.

    Returns an ``(steps**2, 3)`` array of ``(x1, x2, value)`` rows, ``x1``
    varying slowest. Points outside the measure's domain get NaN.
    ``qspace2`` is the squared q-space measure.
    """
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}; expected one of {sorted(SPACES)}")
    steps = int(steps)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not grid_max > grid_min:
        raise ValueError("grid_max must exceed grid_min")
    if space == "lp" and not exponent >= 1:
        raise DomainError(f"p-norm requires p >= 1, got {exponent}")
    fn = SPACES[space]
    axis = np.linspace(grid_min, grid_max, steps)
    out = np.empty((steps * steps, 3))
    i = 0
    for x1 in axis:
        for x2 in axis:
            try:
                val = fn((x1, x2), exponent)
            except DomainError:
                val = np.nan
            out[i] = (x1, x2, val)
            i += 1
    return out
