"""Gradient-boosted regression trees on the logistic loss."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._base import BinaryClassifier
from .linear import _sigmoid

__all__ = ["GbmClassifier", "TreeNode", "build_tree", "best_split"]

_P_CLIP = 1e-12


@dataclass
class TreeNode:
    """Axis-aligned regression tree node; leaves carry a Newton step value."""

    value: float = 0.0
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X))
        self._fill(X, np.arange(len(X)), out)
        return out

    def _fill(self, X, idx, out):
        if self.is_leaf:
            out[idx] = self.value
            return
        go_left = X[idx, self.feature] <= self.threshold
        self.left._fill(X, idx[go_left], out)
        self.right._fill(X, idx[~go_left], out)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature" not in d:
            return cls(value=d["value"])
        return cls(
            feature=d["feature"],
            threshold=d["threshold"],
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


def best_split(X: np.ndarray, grad: np.ndarray, min_leaf: int) -> Optional[tuple[int, float, float]]:
    """Exact greedy search over sorted feature values.

    Returns (feature, threshold, gain) maximizing the squared-error
    reduction of fitting the gradient, or None when no split leaves both
    children with at least ``min_leaf`` rows.  Ties keep the lowest
    feature index, then the lowest threshold.
    """
    n, d = X.shape
    if n < 2 * min_leaf:
        return None
    total = grad.sum()
    base = total * total / n
    best: Optional[tuple[int, float, float]] = None
    for f in range(d):
        order = np.argsort(X[:, f], kind="mergesort")
        xs = X[order, f]
        gs = np.cumsum(grad[order])[:-1]  # left sums for split after position i
        n_left = np.arange(1, n)
        valid = (xs[1:] != xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        gains = gs**2 / n_left + (total - gs) ** 2 / (n - n_left) - base
        gains[~valid] = -np.inf
        pos = int(np.argmax(gains))  # first maximum -> lowest threshold
        if gains[pos] <= 0:
            continue
        if best is None or gains[pos] > best[2]:
            threshold = 0.5 * (xs[pos] + xs[pos + 1])
            best = (f, float(threshold), float(gains[pos]))
    return best


def _leaf_value(grad: np.ndarray, hess: np.ndarray) -> float:
    return float(grad.sum() / max(hess.sum(), _P_CLIP))


def build_tree(
    X: np.ndarray, grad: np.ndarray, hess: np.ndarray, max_depth: int, min_leaf: int
) -> TreeNode:
    """Fit gradients by squared error; leaf values take a Newton step."""
    if max_depth == 0:
        return TreeNode(value=_leaf_value(grad, hess))
    split = best_split(X, grad, min_leaf)
    if split is None:
        return TreeNode(value=_leaf_value(grad, hess))
    f, threshold, _ = split
    go_left = X[:, f] <= threshold
    return TreeNode(
        feature=f,
        threshold=threshold,
        left=build_tree(X[go_left], grad[go_left], hess[go_left], max_depth - 1, min_leaf),
        right=build_tree(X[~go_left], grad[~go_left], hess[~go_left], max_depth - 1, min_leaf),
    )


class GbmClassifier(BinaryClassifier):
    """Boosted depth-limited trees with shrinkage on raw (unscaled) features.

    Each round fits a regression tree to the loss gradient (y - p) and
    adds ``learning_rate`` times its Newton-valued leaves to the score.
    The per-round training log-loss is kept in ``train_loss_path_``.
    """

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1, max_depth: int = 3,
                 min_samples_leaf: int = 10, standardize: bool = False):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.standardize = standardize

    def fit(self, X, y):
        X, y = self._prepare_fit(X, y)
        rate = min(max(y.mean(), _P_CLIP), 1 - _P_CLIP)
        self.base_score_ = math.log(rate / (1 - rate))
        self.trees_: list[TreeNode] = []
        self.train_loss_path_: list[float] = []
        if len(np.unique(y)) < 2:
            return self  # constant model at the class log-odds
        f = np.full(len(X), self.base_score_)
        for _ in range(self.n_rounds):
            p = _sigmoid(f)
            tree = build_tree(X, y - p, p * (1 - p), self.max_depth, self.min_samples_leaf)
            self.trees_.append(tree)
            f += self.learning_rate * tree.predict(X)
            self.train_loss_path_.append(_log_loss(y, _sigmoid(f)))
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._prepare_predict(X)
        f = np.full(len(X), self.base_score_)
        for tree in self.trees_:
            f += self.learning_rate * tree.predict(X)
        return f

    def predict_proba(self, X) -> np.ndarray:
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1 - p1, p1])

    def predict_score(self, X) -> np.ndarray:
        return self.predict_proba(X)[:, 1]

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) > 0.5).astype(int)


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, _P_CLIP, 1 - _P_CLIP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
