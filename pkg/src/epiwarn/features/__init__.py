"""Feature representations of labeled windows.

Two banks are available: the 22-feature statistical set ("SF22") and the
5 early-warning indicators ("EWSI5").  ``featurize`` turns a window
collection into a labeled feature matrix; the extractor classes wrap the
same computations in a transformer interface so they compose with
scikit-learn pipelines.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..windows import LABEL_N, LABEL_T, LabeledWindow
from ._common import DegenerateSeriesError, z_normalize
from .catch22 import CATCH22_NAMES, compute_catch22
from .ews import EWS5_NAMES, compute_ews5

__all__ = [
    "SF22",
    "EWSI5",
    "FEATURE_SETS",
    "DegenerateSeriesError",
    "z_normalize",
    "compute_sf22",
    "compute_ewsi5",
    "FeatureVector",
    "FeatureMatrix",
    "featurize",
    "Catch22Extractor",
    "EwsiExtractor",
    "feature_matrix_to_csv",
    "feature_matrix_from_csv",
]

SF22 = "SF22"
EWSI5 = "EWSI5"

compute_sf22 = compute_catch22
compute_ewsi5 = compute_ews5

FEATURE_SETS: dict[str, tuple[tuple[str, ...], Callable]] = {
    SF22: (CATCH22_NAMES, compute_catch22),
    EWSI5: (EWS5_NAMES, compute_ews5),
}


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...]
    set_id: str

    def __post_init__(self):
        names, _ = FEATURE_SETS[self.set_id]
        if len(self.values) != len(names):
            raise ValueError(f"{self.set_id} expects {len(names)} values, got {len(self.values)}")
        if not np.isfinite(self.values).all():
            raise ValueError("feature values must be finite")


@dataclass
class FeatureMatrix:
    """Rectangular feature rows with aligned labels and window provenance."""

    values: np.ndarray
    labels: list[str]
    window_ids: list[str]
    names: tuple[str, ...]
    set_id: str
    errors: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.values) != len(self.labels) or len(self.values) != len(self.window_ids):
            raise ValueError("rows, labels, and window ids must align")

    @property
    def y(self) -> np.ndarray:
        """Binary targets: T -> 1, N -> 0."""
        return np.array([1 if lb == LABEL_T else 0 for lb in self.labels])

    def rows_with_label(self, label: str) -> np.ndarray:
        mask = np.array([lb == label for lb in self.labels])
        return self.values[mask]


def featurize(
    windows: Sequence[LabeledWindow],
    set_id: str,
    fail_fast: bool = True,
) -> FeatureMatrix:
    """One feature row per window, in input order.

    With ``fail_fast=False``, windows whose extraction raises a
    degenerate-input error are skipped and reported in ``.errors``.
    """
    names, fn = FEATURE_SETS[set_id]
    rows, labels, ids = [], [], []
    errors: list[tuple[str, str]] = []
    for w in windows:
        try:
            rows.append(fn(w.values))
        except DegenerateSeriesError as exc:
            if fail_fast:
                raise DegenerateSeriesError(f"window {w.source_id}: {exc}") from exc
            errors.append((w.source_id, str(exc)))
            continue
        labels.append(w.label)
        ids.append(w.source_id)
    values = np.array(rows) if rows else np.empty((0, len(names)))
    return FeatureMatrix(values, labels, ids, names, set_id, errors)


class _SeriesExtractor(BaseEstimator, TransformerMixin):
    """Stateless row-per-series transformer over a 2-d array of series."""

    _set_id: str = ""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        _, fn = FEATURE_SETS[self._set_id]
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        return np.array([fn(row) for row in X])

    def get_feature_names_out(self, input_features=None):
        names, _ = FEATURE_SETS[self._set_id]
        return np.array(names)


class Catch22Extractor(_SeriesExtractor):
    """22 statistical features per series (rows are series)."""

    _set_id = SF22


class EwsiExtractor(_SeriesExtractor):
    """5 early-warning indicators per series (rows are series)."""

    _set_id = EWSI5


def _fmt(x: float) -> str:
    return repr(float(x))


def feature_matrix_to_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "label"] + list(matrix.names))
        for wid, label, row in zip(matrix.window_ids, matrix.labels, matrix.values):
            writer.writerow([wid, label] + [_fmt(v) for v in row])


def feature_matrix_from_csv(path: str | Path) -> FeatureMatrix:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = tuple(header[2:])
        set_id = SF22 if names == CATCH22_NAMES else EWSI5 if names == EWS5_NAMES else None
        if set_id is None:
            raise ValueError(f"{path}: header does not match a known feature set")
        ids, labels, rows = [], [], []
        for row in reader:
            ids.append(row[0])
            labels.append(row[1])
            rows.append([float(v) for v in row[2:]])
    values = np.array(rows) if rows else np.empty((0, len(names)))
    return FeatureMatrix(values, labels, ids, names, set_id)
