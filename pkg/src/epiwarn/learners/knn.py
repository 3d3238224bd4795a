"""k-nearest-neighbor vote classifier with cross-validated k."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ._base import BinaryClassifier

__all__ = ["KnnClassifier"]


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (a - b)^2 expanded; clip tiny negatives from cancellation
    d = (a**2).sum(1)[:, None] + (b**2).sum(1)[None, :] - 2 * (a @ b.T)
    return np.clip(d, 0, None)


def _vote(dist_row: np.ndarray, y: np.ndarray, k: int) -> float:
    """Fraction of outbreak labels among the k nearest, distance ties included."""
    kth = np.partition(dist_row, k - 1)[k - 1]
    included = dist_row <= kth  # all neighbors tied at the k-th distance vote
    return float(y[included].mean())


class KnnClassifier(BinaryClassifier):
    """Euclidean k-NN on standardized features.

    ``k=None`` selects k by 5-fold cross-validated accuracy over the odd
    grid 3..13, preferring the smallest k on ties.  Neighbors tied with
    the k-th distance are all included and the vote renormalized, which
    keeps predictions deterministic.
    """

    def __init__(self, k: Optional[int] = None, k_grid: Sequence[int] = (3, 5, 7, 9, 11, 13),
                 cv_folds: int = 5, standardize: bool = True, random_state: int = 0):
        self.k = k
        self.k_grid = k_grid
        self.cv_folds = cv_folds
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y):
        X, y = self._prepare_fit(X, y)
        self.X_, self.y_ = X, y
        if self.k is not None:
            if self.k > len(X):
                raise ValueError(f"k={self.k} exceeds {len(X)} training rows")
            self.k_ = int(self.k)
            return self
        grid = [k for k in self.k_grid if k <= max(len(X) - 1, 1)]
        if not grid:
            raise ValueError("training set too small for the k grid")
        self.k_ = self._cross_validate_k(X, y, grid)
        return self

    def _cross_validate_k(self, X, y, grid) -> int:
        rng = np.random.default_rng(self.random_state)
        order = rng.permutation(len(X))
        folds = np.array_split(order, self.cv_folds)
        hits = {k: 0 for k in grid}
        for f, held in enumerate(folds):
            if len(held) == 0:
                continue
            train_idx = np.concatenate([folds[g] for g in range(self.cv_folds) if g != f])
            d = _pairwise_sq_dists(X[held], X[train_idx])
            yt = y[train_idx]
            for k in grid:
                if k > len(train_idx):
                    continue
                votes = np.array([_vote(row, yt, k) for row in d])
                hits[k] += int(np.sum((votes > 0.5).astype(int) == y[held]))
        best_k, best_hits = grid[0], -1
        for k in grid:  # ascending: ties go to the smallest k
            if hits[k] > best_hits:
                best_k, best_hits = k, hits[k]
        return best_k

    def predict_score(self, X) -> np.ndarray:
        X = self._prepare_predict(X)
        d = _pairwise_sq_dists(X, self.X_)
        return np.array([_vote(row, self.y_, self.k_) for row in d])

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) > 0.5).astype(int)
