"""Ridge-regularized logistic regression fit by iteratively reweighted least squares."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ._base import BinaryClassifier

__all__ = ["LrmClassifier"]

_P_CLIP = 1e-12


class LrmClassifier(BinaryClassifier):
    """Logistic regression maximizing the L2-penalized Bernoulli likelihood.

    Newton/IRLS updates run until the largest coefficient change falls
    below ``tol`` or ``max_iter`` is hit.  The tiny default ridge keeps
    the normal equations solvable on separable data; the intercept is not
    penalized.
    """

    def __init__(self, ridge: float = 1e-6, tol: float = 1e-8, max_iter: int = 100,
                 standardize: bool = True):
        self.ridge = ridge
        self.tol = tol
        self.max_iter = max_iter
        self.standardize = standardize

    def fit(self, X, y):
        X, y = self._prepare_fit(X, y)
        n, d = X.shape
        if len(np.unique(y)) < 2:
            rate = min(max(y.mean(), _P_CLIP), 1 - _P_CLIP)
            warnings.warn("single-class training data: fitting intercept-only model", UserWarning)
            self.coef_ = np.zeros(d)
            self.intercept_ = math.log(rate / (1 - rate))
            self.n_iter_ = 0
            return self

        a = np.column_stack([np.ones(n), X])  # column 0 is the intercept
        beta = np.zeros(d + 1)
        penalty = self.ridge * np.eye(d + 1)
        penalty[0, 0] = 0.0
        for it in range(self.max_iter):
            p = _sigmoid(a @ beta)
            w = np.clip(p * (1 - p), _P_CLIP, None)
            # Newton step on the penalized log-likelihood
            h = a.T @ (a * w[:, None]) + penalty
            g = a.T @ (y - p) - penalty @ beta
            step = np.linalg.solve(h, g)
            beta = beta + step
            if np.abs(step).max() < self.tol:
                break
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        self.n_iter_ = it + 1
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = self._prepare_predict(X)
        p1 = _sigmoid(X @ self.coef_ + self.intercept_)
        return np.column_stack([1 - p1, p1])

    def predict_score(self, X) -> np.ndarray:
        return self.predict_proba(X)[:, 1]

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) > 0.5).astype(int)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
