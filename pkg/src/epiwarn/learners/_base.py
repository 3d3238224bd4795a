"""Shared plumbing for the four binary classifiers.

Targets are 0/1 (non-outbreak / outbreak).  Every learner exposes
``predict_score`` (a ranking score monotone in outbreak confidence) and
``predict`` (hard labels); fitted models are immutable in use and safe to
share across threads.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .standardize import Standardizer, apply_standardizer

__all__ = ["BinaryClassifier", "check_Xy", "check_X"]


def check_X(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    return X


def check_Xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = check_X(X)
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != len(X):
        raise ValueError("y must be 1-d and aligned with X")
    y = y.astype(int)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("y must contain only 0/1 labels")
    return X, y


class BinaryClassifier(BaseEstimator, ClassifierMixin):
    """Base for the hand-rolled learners; handles optional standardization."""

    standardize: bool = True

    def _prepare_fit(self, X, y):
        X, y = check_Xy(X, y)
        if self.standardize:
            self.standardizer_ = Standardizer().fit(X)
            X = self.standardizer_.transform(X)
        else:
            self.standardizer_ = None
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return X, y

    def _prepare_predict(self, X):
        X = check_X(X)
        if self.standardizer_ is not None:
            expected = len(self.standardizer_.stats_.mean) + len(self.standardizer_.stats_.dropped)
            if X.shape[1] != expected:
                raise ValueError(f"expected {expected} features, got {X.shape[1]}")
            X = self.standardizer_.transform(X)
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def predict_score(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError
