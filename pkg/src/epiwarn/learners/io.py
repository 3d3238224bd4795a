"""Versioned JSON persistence for trained models.

Only what prediction needs round-trips; training diagnostics (loss paths,
dual objectives) stay with the in-memory estimator.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gbm import GbmClassifier, TreeNode
from .knn import KnnClassifier
from .linear import LrmClassifier
from .standardize import StandardizationStats, Standardizer
from .svm import SvmClassifier

__all__ = ["save_model", "load_model", "SCHEMA"]

SCHEMA = "epiwarn-model/1"


def _stats_to_json(standardizer) -> dict | None:
    if standardizer is None:
        return None
    s = standardizer.stats_
    return {
        "mean": s.mean.tolist(),
        "sd": s.sd.tolist(),
        "kept": s.kept.tolist(),
        "dropped": list(s.dropped),
    }


def _stats_from_json(d: dict | None):
    if d is None:
        return None
    std = Standardizer()
    std.stats_ = StandardizationStats(
        mean=np.array(d["mean"]),
        sd=np.array(d["sd"]),
        kept=np.array(d["kept"], dtype=int),
        dropped=tuple(d["dropped"]),
    )
    return std


def _state_of(model) -> dict:
    if isinstance(model, LrmClassifier):
        return {"coef": model.coef_.tolist(), "intercept": model.intercept_}
    if isinstance(model, KnnClassifier):
        return {"X": model.X_.tolist(), "y": model.y_.tolist(), "k": model.k_}
    if isinstance(model, SvmClassifier):
        return {
            "support_vectors": model.support_vectors_.tolist(),
            "dual_coef": model.dual_coef_.tolist(),
            "intercept": model.intercept_,
            "gamma": model.gamma_,
        }
    if isinstance(model, GbmClassifier):
        return {
            "base_score": model.base_score_,
            "trees": [t.to_dict() for t in model.trees_],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _restore_state(model, state: dict, n_features: int) -> None:
    if isinstance(model, LrmClassifier):
        model.coef_ = np.array(state["coef"])
        model.intercept_ = state["intercept"]
    elif isinstance(model, KnnClassifier):
        model.X_ = np.array(state["X"])
        model.y_ = np.array(state["y"], dtype=int)
        model.k_ = state["k"]
    elif isinstance(model, SvmClassifier):
        model.support_vectors_ = np.array(state["support_vectors"])
        model.dual_coef_ = np.array(state["dual_coef"])
        model.intercept_ = state["intercept"]
        model.gamma_ = state["gamma"]
    elif isinstance(model, GbmClassifier):
        model.base_score_ = state["base_score"]
        model.trees_ = [TreeNode.from_dict(t) for t in state["trees"]]
    model.n_features_in_ = n_features
    model.classes_ = np.array([0, 1])


_KIND_TO_CLASS = {
    "GBM": GbmClassifier,
    "LRM": LrmClassifier,
    "KNN": KnnClassifier,
    "SVM": SvmClassifier,
}


def save_model(model, path: str | Path, kind: str, feature_set: str = "") -> None:
    doc = {
        "schema": SCHEMA,
        "kind": kind,
        "feature_set": feature_set,
        "hyperparams": model.get_params(),
        "standardization": _stats_to_json(model.standardizer_),
        "n_features": int(model.n_features_in_),
        "state": _state_of(model),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_model(path: str | Path):
    """Returns (estimator, metadata) where metadata has kind and feature_set."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"{path}: unsupported model schema {doc.get('schema')!r}")
    cls = _KIND_TO_CLASS[doc["kind"]]
    model = cls(**doc["hyperparams"])
    model.standardizer_ = _stats_from_json(doc["standardization"])
    _restore_state(model, doc["state"], doc["n_features"])
    meta = {"kind": doc["kind"], "feature_set": doc["feature_set"]}
    return model, meta
