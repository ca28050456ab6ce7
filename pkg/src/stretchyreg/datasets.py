"""Delimited-file loading, the built-in three-point set, and train/test splits.

The prostate-cancer benchmark is not bundled. Download the tab-separated
``prostate.data`` file distributed with *The Elements of Statistical
Learning* and point :envvar:`STRETCHYREG_PROSTATE` at it (or place it at
``data/prostate.data`` relative to the working directory).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataFormatError, EmptyInputError

PROSTATE_URL = "https://hastie.su.domains/ElemStatLearn/datasets/prostate.data"
PROSTATE_FEATURES = ("lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45")
PROSTATE_TARGET = "lpsa"
PROSTATE_ENV = "STRETCHYREG_PROSTATE"


@dataclass(frozen=True)
class Dataset:
    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    split: np.ndarray | None = None  # True for training rows
    name: str = ""

    def __post_init__(self):
        M = self.X.shape[0]
        if self.y.shape != (M,):
            raise DataFormatError(f"X has {M} rows but y has shape {self.y.shape}")
        if self.split is not None and self.split.shape != (M,):
            raise DataFormatError(f"split flags have shape {self.split.shape}, expected ({M},)")
        if self.X.ndim != 2 or len(self.feature_names) != self.X.shape[1]:
            raise DataFormatError("feature names do not match the column count")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, mask, name=None) -> "Dataset":
        return Dataset(
            feature_names=self.feature_names,
            X=self.X[mask],
            y=self.y[mask],
            split=None if self.split is None else self.split[mask],
            name=self.name if name is None else name,
        )


def _parse_float(cell: str, row: int, col: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataFormatError(f"non-numeric value {cell!r} at row {row}, column {col!r}") from None
    if not np.isfinite(value):
        raise DataFormatError(f"non-finite value {cell!r} at row {row}, column {col!r}")
    return value


def load_delimited(path, delimiter="\t", target_column=PROSTATE_TARGET,
                   split_column=None, split_train_value="T") -> Dataset:
    """Read a headed delimited text file into a :class:`Dataset`.

    Every column other than the target and split columns is a feature. An
    unnamed first header field marks a row-index column, which is dropped.
    Row numbers in error messages are 1-based file lines.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    skip_index = header[0] == ""
    names = header[1:] if skip_index else header
    if target_column not in names:
        raise DataFormatError(f"{path}: target column {target_column!r} not in header {names}")
    if split_column is not None and split_column not in names:
        raise DataFormatError(f"{path}: split column {split_column!r} not in header {names}")
    if len(set(names)) != len(names):
        raise DataFormatError(f"{path}: duplicate column names in header")
    features = [n for n in names if n not in (target_column, split_column)]
    t_idx = names.index(target_column)
    s_idx = None if split_column is None else names.index(split_column)
    f_idx = [names.index(n) for n in features]

    X = np.empty((len(rows) - 1, len(features)))
    y = np.empty(len(rows) - 1)
    split = None if s_idx is None else np.empty(len(rows) - 1, dtype=bool)
    for i, raw in enumerate(rows[1:]):
        line = i + 2
        cells = [c.strip() for c in raw]
        if skip_index:
            cells = cells[1:]
        if len(cells) != len(names):
            raise DataFormatError(
                f"{path}: row {line} has {len(cells)} fields, expected {len(names)}"
            )
        for j, k in enumerate(f_idx):
            X[i, j] = _parse_float(cells[k], line, names[k])
        y[i] = _parse_float(cells[t_idx], line, target_column)
        if split is not None:
            split[i] = cells[s_idx] == split_train_value
    return Dataset(tuple(features), X, y, split, name=path.stem)


def find_prostate(path=None) -> Path | None:
    """Locate a local copy of ``prostate.data``; ``None`` if there is none."""
    candidates = [path, os.environ.get(PROSTATE_ENV), "data/prostate.data"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


def load_prostate(path=None) -> Dataset:
    """Load the prostate-cancer file and check it has the published layout."""
    found = find_prostate(path)
    if found is None:
        raise FileNotFoundError(
            f"prostate.data not found; download it from {PROSTATE_URL} "
            f"and set {PROSTATE_ENV}"
        )
    ds = load_delimited(found, "\t", PROSTATE_TARGET, "train", "T")
    if ds.feature_names != PROSTATE_FEATURES:
        raise DataFormatError(f"{found}: unexpected feature columns {ds.feature_names}")
    if ds.n_samples != 97 or int(ds.split.sum()) != 67:
        raise DataFormatError(
            f"{found}: expected 97 rows with 67 training rows, got "
            f"{ds.n_samples} rows / {int(ds.split.sum())} training"
        )
    return Dataset(ds.feature_names, ds.X, ds.y, ds.split, name="prostate")


def synthetic_three_points() -> Dataset:
    """Three first-quadrant points: one negative, two positive, mirror-symmetric.

    The negative point lies on ``x1 + x2 = 0.2`` and the positives on
    ``x1 + x2 = 0.3``, so ``-5 + 20*(x1 + x2)`` reproduces all three labels.
    """
    X = np.array([[0.1, 0.1], [0.1, 0.2], [0.2, 0.1]])
    y = np.array([-1.0, 1.0, 1.0])
    return Dataset(("x1", "x2"), X, y, None, name="synthetic")


def split(ds: Dataset) -> tuple[Dataset, Dataset]:
    """Partition into (train, test), keeping row order within each part."""
    if ds.n_samples == 0:
        raise EmptyInputError("cannot split an empty dataset")
    if ds.split is None:
        raise DataFormatError(f"dataset {ds.name!r} has no split flags")
    return ds.subset(ds.split, f"{ds.name}:train"), ds.subset(~ds.split, f"{ds.name}:test")
