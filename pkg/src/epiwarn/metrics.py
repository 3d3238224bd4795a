"""ROC/AUC statistics, rank tests, and evaluation reports.

AUC uses the rank-sum form; its variance and the AUC-comparison test use
the structural-component (placement-value) decomposition, so confidence
intervals and p-values need no resampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

__all__ = [
    "midranks",
    "roc_auc",
    "auc_ci",
    "delong_test",
    "delong_test_unpaired",
    "mann_whitney_u",
    "accuracy_ci",
    "EvalReport",
    "evaluate",
    "UndefinedAucError",
]


class UndefinedAucError(ValueError):
    """AUC requires both classes in the labels."""


def midranks(x) -> np.ndarray:
    """1-based ranks with ties sharing their midrank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    z = x[order]
    n = len(x)
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + j - 1) + 1
        i = j
    out = np.empty(n)
    out[order] = ranks
    return out


def _split_scores(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must align")
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise UndefinedAucError("both classes must be present to compute AUC")
    return pos, neg


def roc_auc(scores, labels) -> float:
    """P(score_pos > score_neg) + half the ties, via rank sums."""
    pos, neg = _split_scores(scores, labels)
    m, n = len(pos), len(neg)
    ranks = midranks(np.concatenate([pos, neg]))
    return float((ranks[:m].sum() - m * (m + 1) / 2) / (m * n))


def _structural_components(scores, labels) -> tuple[float, np.ndarray, np.ndarray]:
    """AUC plus per-positive (V10) and per-negative (V01) placement values."""
    pos, neg = _split_scores(scores, labels)
    m, n = len(pos), len(neg)
    combined = np.concatenate([pos, neg])
    tz = midranks(combined)
    tx = midranks(pos)
    ty = midranks(neg)
    v10 = (tz[:m] - tx) / n
    v01 = 1.0 - (tz[m:] - ty) / m
    auc = float(v10.mean())
    return auc, v10, v01


def _auc_variance(v10: np.ndarray, v01: np.ndarray) -> float:
    m, n = len(v10), len(v01)
    s10 = v10.var(ddof=1) if m > 1 else 0.0
    s01 = v01.var(ddof=1) if n > 1 else 0.0
    return s10 / m + s01 / n


def auc_ci(scores, labels, level: float = 0.95) -> float:
    """Half-width of the normal AUC confidence interval from structural components."""
    if not 0 <= level < 1:
        raise ValueError("level must be in [0, 1)")
    _, v10, v01 = _structural_components(scores, labels)
    z = norm.ppf(0.5 + level / 2)
    return float(z * np.sqrt(_auc_variance(v10, v01)))


def _two_sided_p(delta: float, var: float) -> float:
    if var <= 0:
        return 1.0 if delta == 0 else 0.0
    z = delta / np.sqrt(var)
    return float(2 * norm.sf(abs(z)))


def delong_test(scores_a, scores_b, labels) -> float:
    """Two-sided p for equal AUCs of two score vectors on the same labeled rows.

    The shared rows correlate the two AUC estimates; the covariance of
    their structural components absorbs that.  Two degenerate (zero
    variance) equal AUCs, e.g. both exactly 1, give p = 1 by convention.
    """
    scores_a, scores_b = np.asarray(scores_a, float), np.asarray(scores_b, float)
    if scores_a.shape != scores_b.shape:
        raise ValueError("paired test needs equal-length score vectors")
    auc_a, v10_a, v01_a = _structural_components(scores_a, labels)
    auc_b, v10_b, v01_b = _structural_components(scores_b, labels)
    m, n = len(v10_a), len(v01_a)
    cov10 = float(np.cov(v10_a, v10_b, ddof=1)[0, 1]) if m > 1 else 0.0
    cov01 = float(np.cov(v01_a, v01_b, ddof=1)[0, 1]) if n > 1 else 0.0
    var = _auc_variance(v10_a, v01_a) + _auc_variance(v10_b, v01_b) - 2 * (cov10 / m + cov01 / n)
    return _two_sided_p(auc_a - auc_b, max(var, 0.0))


def delong_test_unpaired(scores_a, labels_a, scores_b, labels_b) -> float:
    """Two-sided p for equal AUCs estimated on two independent labeled sets."""
    auc_a, v10_a, v01_a = _structural_components(scores_a, labels_a)
    auc_b, v10_b, v01_b = _structural_components(scores_b, labels_b)
    var = _auc_variance(v10_a, v01_a) + _auc_variance(v10_b, v01_b)
    return _two_sided_p(auc_a - auc_b, var)


def _exact_u_pmf(n1: int, n2: int) -> np.ndarray:
    """P(U = u) under the tie-free null, by the standard counting recurrence.

    The largest remaining observation is either an x (adding j
    exceedances over the j remaining y's) or a y (adding none).
    """
    max_u = n1 * n2
    table = np.zeros((n1 + 1, n2 + 1, max_u + 1))
    table[0, :, 0] = 1.0
    table[:, 0, 0] = 1.0
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            table[i, j, :] = table[i, j - 1, :]
            shifted = np.roll(table[i - 1, j, :], j)
            shifted[:j] = 0
            table[i, j, :] += shifted
    probs = table[n1, n2, :]
    return probs / probs.sum()


def mann_whitney_u(x, y, alternative: str = "two-sided", method: str = "auto") -> tuple[float, float]:
    """Rank-sum U of x over y and its p-value.

    ``method="auto"`` uses the exact null distribution for small tie-free
    samples (both sizes <= 8) and otherwise the normal approximation with
    tie-corrected variance and continuity correction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be non-empty")
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    n1, n2 = len(x), len(y)
    combined = np.concatenate([x, y])
    ranks = midranks(combined)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)

    has_ties = len(np.unique(combined)) < len(combined)
    if method == "auto":
        method = "exact" if (not has_ties and n1 <= 8 and n2 <= 8) else "asymptotic"
    if method == "exact":
        if has_ties:
            raise ValueError("exact method is undefined with ties")
        probs = _exact_u_pmf(n1, n2)
        ui = int(round(u))
        cdf = probs[: ui + 1].sum()
        sf = probs[ui:].sum()
        if alternative == "greater":
            p = sf
        elif alternative == "less":
            p = cdf
        else:
            p = min(1.0, 2 * min(cdf, sf))
        return u, float(p)

    mu = n1 * n2 / 2.0
    n = n1 + n2
    _, tie_counts = np.unique(combined, return_counts=True)
    tie_term = (tie_counts**3 - tie_counts).sum() / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return u, 1.0
    sd = np.sqrt(var)
    if alternative == "greater":
        p = float(norm.sf((u - mu - 0.5) / sd))
    elif alternative == "less":
        p = float(norm.cdf((u - mu + 0.5) / sd))
    else:
        shift = 0.5 if u > mu else (-0.5 if u < mu else 0.0)
        p = float(min(1.0, 2 * norm.sf(abs((u - mu - shift) / sd))))
    return u, p


def accuracy_ci(p_hat: float, n: int, level: float = 0.95) -> float:
    """Wald binomial half-width z * sqrt(p(1-p)/n)."""
    if not 0 <= p_hat <= 1:
        raise ValueError("p_hat must be in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    z = norm.ppf(0.5 + level / 2)
    return float(z * np.sqrt(p_hat * (1 - p_hat) / n))


@dataclass(frozen=True)
class EvalReport:
    classifier_id: str
    dataset_id: str
    n_pos: int
    n_neg: int
    accuracy: float
    accuracy_ci_halfwidth: float
    auc: Optional[float]
    auc_ci_halfwidth: Optional[float]
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def auc_available(self) -> bool:
        return self.auc is not None


def evaluate(model, test, classifier_id: str = "", dataset_id: str = "") -> EvalReport:
    """Accuracy (hard labels) and AUC (ranking scores) on a labeled feature matrix.

    Single-class test sets still yield accuracy, but the AUC fields stay
    empty since ranking quality is undefined there.
    """
    if len(test.values) == 0:
        raise ValueError("empty test matrix")
    y = test.y
    pred = model.predict(test.values)
    scores = model.predict_score(test.values)
    n_pos = int(y.sum())
    n_neg = int(len(y) - n_pos)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    accuracy = float((tp + tn) / len(y))
    if n_pos and n_neg:
        auc = roc_auc(scores, y)
        auc_hw = auc_ci(scores, y)
    else:
        auc = auc_hw = None
    return EvalReport(
        classifier_id=classifier_id,
        dataset_id=dataset_id,
        n_pos=n_pos,
        n_neg=n_neg,
        accuracy=accuracy,
        accuracy_ci_halfwidth=accuracy_ci(accuracy, len(y)),
        auc=auc,
        auc_ci_halfwidth=auc_hw,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )
