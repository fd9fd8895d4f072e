"""Tiny deterministic stand-in models and schemas shared across tests."""

from __future__ import annotations

import numpy as np

from riskscope.data import FeatureSchema, FeatureSpec


def make_schema(d: int, actionable: bool = True) -> FeatureSchema:
    return FeatureSchema(
        tuple(
            FeatureSpec(name=f"f{j}", unit="u", actionable=actionable, healthy_direction="decrease")
            for j in range(d)
        )
    )


class LinearProbModel:
    """p(x) = clip(0.5 + scale * w.x); slopes are the ground-truth importances."""

    def __init__(self, w, scale: float = 0.1):
        self.w = np.asarray(w, dtype=np.float64)
        self.scale = scale

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.clip(0.5 + self.scale * (X @ self.w), 1e-6, 1.0 - 1e-6)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba_batch(X) >= 0.5).astype(np.int64)


class ThresholdModel:
    """Classifies on the sign of one coordinate; probabilities follow suit."""

    def __init__(self, j: int = 0):
        self.j = j

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.where(X[:, self.j] > 0.0, 0.9, 0.1)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64)[:, self.j] > 0.0).astype(np.int64)

    def predict(self, x: np.ndarray) -> int:
        return int(self.predict_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])
