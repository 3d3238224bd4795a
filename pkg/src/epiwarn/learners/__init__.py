"""The four classifier families and their shared training plumbing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._base import BinaryClassifier
from .gbm import GbmClassifier
from .knn import KnnClassifier
from .linear import LrmClassifier
from .standardize import Standardizer, StandardizationStats, apply_standardizer, fit_standardizer
from .svm import SvmClassifier
from .io import load_model, save_model

__all__ = [
    "MODEL_KINDS",
    "TrainConfig",
    "make_model",
    "train",
    "BinaryClassifier",
    "GbmClassifier",
    "KnnClassifier",
    "LrmClassifier",
    "SvmClassifier",
    "Standardizer",
    "StandardizationStats",
    "fit_standardizer",
    "apply_standardizer",
    "save_model",
    "load_model",
]

MODEL_KINDS = {
    "GBM": GbmClassifier,
    "LRM": LrmClassifier,
    "KNN": KnnClassifier,
    "SVM": SvmClassifier,
}


@dataclass
class TrainConfig:
    """Per-kind hyperparameter overrides plus the run seed."""

    seed: int = 0
    gbm: dict[str, Any] = field(default_factory=dict)
    lrm: dict[str, Any] = field(default_factory=dict)
    knn: dict[str, Any] = field(default_factory=dict)
    svm: dict[str, Any] = field(default_factory=dict)

    def kwargs_for(self, kind: str) -> dict[str, Any]:
        extra = dict(getattr(self, kind.lower()))
        if kind == "KNN":
            extra.setdefault("random_state", self.seed)
        return extra


def make_model(kind: str, config: TrainConfig | None = None) -> BinaryClassifier:
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_KINDS)}")
    config = config or TrainConfig()
    return MODEL_KINDS[kind](**config.kwargs_for(kind))


def train(kind: str, X: np.ndarray, y: np.ndarray, config: TrainConfig | None = None) -> BinaryClassifier:
    return make_model(kind, config).fit(X, y)
