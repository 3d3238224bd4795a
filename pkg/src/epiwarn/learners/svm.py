"""Soft-margin RBF support vector machine trained by sequential minimal optimization."""

from __future__ import annotations

import numpy as np

from ._base import BinaryClassifier

__all__ = ["SvmClassifier", "rbf_kernel"]


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (a**2).sum(1)[:, None] + (b**2).sum(1)[None, :] - 2 * (a @ b.T)
    return np.exp(-gamma * np.clip(sq, 0, None))


class SvmClassifier(BinaryClassifier):
    """C-classification with an RBF kernel, solved by pairwise SMO updates.

    gamma defaults to 1/n_features.  Optimization stops once a full pass
    finds every sample satisfying the KKT conditions within ``tol``.  The
    per-sweep dual objective is retained in ``dual_objective_path_`` and
    the ranking score is the signed decision value.
    """

    def __init__(self, c: float = 1.0, gamma: float | None = None, tol: float = 1e-3,
                 max_sweeps: int = 200, standardize: bool = True):
        self.c = c
        self.gamma = gamma
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.standardize = standardize

    def fit(self, X, y):
        X, y01 = self._prepare_fit(X, y)
        if len(np.unique(y01)) < 2:
            raise ValueError("SVM training needs both classes present")
        y = np.where(y01 == 1, 1.0, -1.0)
        n = len(X)
        gamma = self.gamma if self.gamma is not None else 1.0 / X.shape[1]
        k = rbf_kernel(X, X, gamma)

        alpha = np.zeros(n)
        b = 0.0
        errors = -y.copy()  # f(x) = 0 initially, E_i = f(x_i) - y_i
        c = self.c
        eps = 1e-12
        objective_path = []

        def take_step(i1: int, i2: int) -> bool:
            nonlocal b, errors
            if i1 == i2:
                return False
            a1_old, a2_old = alpha[i1], alpha[i2]
            y1, y2 = y[i1], y[i2]
            e1, e2 = errors[i1], errors[i2]
            s = y1 * y2
            if s > 0:
                lo, hi = max(0.0, a1_old + a2_old - c), min(c, a1_old + a2_old)
            else:
                lo, hi = max(0.0, a2_old - a1_old), min(c, c + a2_old - a1_old)
            if lo >= hi:
                return False
            k11, k12, k22 = k[i1, i1], k[i1, i2], k[i2, i2]
            eta = k11 + k22 - 2 * k12
            if eta > 0:
                a2 = a2_old + y2 * (e1 - e2) / eta
                a2 = min(max(a2, lo), hi)
            else:
                # degenerate curvature: evaluate the objective at both ends
                f1 = y1 * (e1 + b) - a1_old * k11 - s * a2_old * k12
                f2 = y2 * (e2 + b) - s * a1_old * k12 - a2_old * k22
                l1 = a1_old + s * (a2_old - lo)
                h1 = a1_old + s * (a2_old - hi)
                obj_lo = l1 * f1 + lo * f2 + 0.5 * l1**2 * k11 + 0.5 * lo**2 * k22 + s * lo * l1 * k12
                obj_hi = h1 * f1 + hi * f2 + 0.5 * h1**2 * k11 + 0.5 * hi**2 * k22 + s * hi * h1 * k12
                if obj_lo < obj_hi - eps:
                    a2 = lo
                elif obj_lo > obj_hi + eps:
                    a2 = hi
                else:
                    return False
            if abs(a2 - a2_old) < eps * (a2 + a2_old + eps):
                return False
            a1 = a1_old + s * (a2_old - a2)

            b1 = b - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12
            b2 = b - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22
            if 0 < a1 < c:
                b_new = b1
            elif 0 < a2 < c:
                b_new = b2
            else:
                b_new = 0.5 * (b1 + b2)

            errors += (
                y1 * (a1 - a1_old) * k[:, i1]
                + y2 * (a2 - a2_old) * k[:, i2]
                + (b_new - b)
            )
            alpha[i1], alpha[i2] = a1, a2
            b = b_new
            return True

        def examine(i2: int) -> bool:
            y2, a2, e2 = y[i2], alpha[i2], errors[i2]
            r2 = e2 * y2
            if not ((r2 < -self.tol and a2 < c) or (r2 > self.tol and a2 > 0)):
                return False
            non_bound = np.flatnonzero((alpha > 0) & (alpha < c))
            if len(non_bound) > 1:
                i1 = int(non_bound[np.argmax(np.abs(errors[non_bound] - e2))])
                if take_step(i1, i2):
                    return True
            for i1 in non_bound:
                if take_step(int(i1), i2):
                    return True
            for i1 in range(n):
                if take_step(i1, i2):
                    return True
            return False

        examine_all = True
        for _ in range(self.max_sweeps):
            changed = 0
            if examine_all:
                # refresh the incrementally maintained cache so the final
                # full pass certifies KKT on exact decision values
                errors = (alpha * y) @ k + b - y
            targets = range(n) if examine_all else np.flatnonzero((alpha > 0) & (alpha < c))
            for i2 in targets:
                changed += examine(int(i2))
            objective_path.append(
                float(alpha.sum() - 0.5 * (alpha * y) @ k @ (alpha * y))
            )
            if examine_all:
                if changed == 0:
                    break
                examine_all = False
            elif changed == 0:
                examine_all = True

        sv = np.flatnonzero(alpha > 0)
        self.gamma_ = gamma
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * y[sv]
        self.alpha_ = alpha
        self.intercept_ = b
        self.dual_objective_path_ = objective_path
        self._train_y = y
        self._train_decision = (alpha * y) @ k + b
        return self

    def kkt_residual(self) -> float:
        """Largest violation of the margin conditions on the training set."""
        yf = self._train_y * self._train_decision
        a, c = self.alpha_, self.c
        viol = np.where(
            a <= 0,
            np.maximum(0.0, 1.0 - yf),          # zero multipliers must clear the margin
            np.where(
                a >= c,
                np.maximum(0.0, yf - 1.0),      # bound multipliers must sit inside it
                np.abs(yf - 1.0),               # interior multipliers sit on it
            ),
        )
        return float(viol.max())

    def decision_function(self, X) -> np.ndarray:
        X = self._prepare_predict(X)
        return rbf_kernel(X, self.support_vectors_, self.gamma_) @ self.dual_coef_ + self.intercept_

    def predict_score(self, X) -> np.ndarray:
        return self.decision_function(X)

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)
