"""Train-statistics feature standardization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

__all__ = ["StandardizationStats", "Standardizer", "fit_standardizer", "apply_standardizer"]


@dataclass(frozen=True)
class StandardizationStats:
    """Per-feature training mean and sd; zero-variance columns are dropped."""

    mean: np.ndarray
    sd: np.ndarray
    kept: np.ndarray  # column indices retained from the input matrix
    dropped: tuple[int, ...] = ()


class Standardizer(BaseEstimator, TransformerMixin):
    """Center/scale columns by training statistics (sample sd, N-1).

    Constant training columns carry no information and break scaling, so
    they are dropped with a warning and recorded in ``stats_``.
    """

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or len(X) < 2:
            raise ValueError("need a 2-d matrix with at least 2 rows")
        mean = X.mean(axis=0)
        sd = X.std(axis=0, ddof=1)
        kept = np.flatnonzero(sd > 0)
        dropped = tuple(int(i) for i in np.flatnonzero(sd == 0))
        if dropped:
            warnings.warn(f"dropping constant feature columns {dropped}", UserWarning)
        self.stats_ = StandardizationStats(mean[kept], sd[kept], kept, dropped)
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        s = self.stats_
        return (X[:, s.kept] - s.mean) / s.sd


def fit_standardizer(train: np.ndarray) -> StandardizationStats:
    return Standardizer().fit(train).stats_


def apply_standardizer(stats: StandardizationStats, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (X[:, stats.kept] - stats.mean) / stats.sd
