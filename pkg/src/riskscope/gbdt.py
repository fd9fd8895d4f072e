"""Gradient-boosted regression trees for binary risk prediction.

The booster minimizes logistic loss with Newton leaf values. Split finding
is an exhaustive scan over midpoints of sorted unique feature values, so
training is fully deterministic and models serialize byte-identically
across retrains with the same seeds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset

MODEL_FORMAT_VERSION = 1

_EPS = 1e-12
_MIN_GAIN = 1e-12


class TrainingError(ValueError):
    """Raised when a dataset cannot support the requested training run."""


@dataclass(frozen=True)
class LearningConfig:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    seed: int = 0  # reserved for stochastic variants; the exhaustive booster is deterministic

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "min_samples_leaf": self.min_samples_leaf,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SplitSpec:
    holdout_fraction: float = 0.4
    seed: int = 42


@dataclass
class Tree:
    """One regression tree in flat-array form. feature[i] < 0 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    weight: float

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.nonzero(self.feature[node] >= 0)[0]
        while active.size:
            ni = node[active]
            go_left = X[active, self.feature[ni]] <= self.threshold[ni]
            node[active] = np.where(go_left, self.left[ni], self.right[ni])
            active = active[self.feature[node[active]] >= 0]
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "weight": self.weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int64),
            threshold=np.array(d["threshold"], dtype=np.float64),
            left=np.array(d["left"], dtype=np.int64),
            right=np.array(d["right"], dtype=np.int64),
            value=np.array(d["value"], dtype=np.float64),
            weight=float(d["weight"]),
        )


class _TreeBuilder:
    """Grows one tree on gradient/hessian targets, preorder, depth-first."""

    def __init__(self, X: np.ndarray, g: np.ndarray, h: np.ndarray, max_depth: int, min_leaf: int):
        self.X = X
        self.g = g
        self.h = h
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def build(self) -> tuple[list, list, list, list, list]:
        self._grow(np.arange(self.X.shape[0]), depth=0)
        return self.feature, self.threshold, self.left, self.right, self.value

    def _leaf(self, idx: np.ndarray) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(self.g[idx].sum() / (self.h[idx].sum() + _EPS)))
        return node

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        if depth >= self.max_depth or idx.size < 2 * self.min_leaf:
            return self._leaf(idx)
        split = self._best_split(idx)
        if split is None:
            return self._leaf(idx)
        j, thr = split
        node = len(self.feature)
        self.feature.append(j)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        go_left = self.X[idx, j] <= thr
        self.left[node] = self._grow(idx[go_left], depth + 1)
        self.right[node] = self._grow(idx[~go_left], depth + 1)
        return node

    def _best_split(self, idx: np.ndarray) -> tuple[int, float] | None:
        g, h = self.g[idx], self.h[idx]
        G, H = g.sum(), h.sum()
        parent = G * G / (H + _EPS)
        n = idx.size
        best_gain = _MIN_GAIN
        best: tuple[int, float] | None = None
        for j in range(self.X.shape[1]):
            v = self.X[idx, j]
            order = np.argsort(v, kind="stable")
            vs = v[order]
            cg = np.cumsum(g[order])
            ch = np.cumsum(h[order])
            pos = np.nonzero(vs[:-1] < vs[1:])[0]
            if pos.size == 0:
                continue
            nl = pos + 1
            ok = (nl >= self.min_leaf) & (n - nl >= self.min_leaf)
            pos = pos[ok]
            if pos.size == 0:
                continue
            gl, hl = cg[pos], ch[pos]
            gains = gl * gl / (hl + _EPS) + (G - gl) ** 2 / (H - hl + _EPS) - parent
            k = int(np.argmax(gains))  # first occurrence wins, so lowest threshold on ties
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (j, float((vs[pos[k]] + vs[pos[k] + 1]) / 2.0))
        return best


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class _PackedForest:
    """All trees in one node table; every tree descends in lockstep."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    roots: np.ndarray
    weights: np.ndarray

    @classmethod
    def pack(cls, trees: list[Tree]) -> "_PackedForest":
        offsets = np.cumsum([0] + [t.feature.size for t in trees[:-1]])
        shift = lambda arr, off: np.where(arr >= 0, arr + off, arr)  # noqa: E731
        return cls(
            feature=np.concatenate([t.feature for t in trees]),
            threshold=np.concatenate([t.threshold for t in trees]),
            left=np.concatenate([shift(t.left, o) for t, o in zip(trees, offsets)]),
            right=np.concatenate([shift(t.right, o) for t, o in zip(trees, offsets)]),
            value=np.concatenate([t.value for t in trees]),
            roots=offsets.astype(np.int64),
            weights=np.array([t.weight for t in trees]),
        )

    def weighted_sum(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        node = np.repeat(self.roots[:, None], n, axis=1)  # (trees, samples)
        rows = np.broadcast_to(np.arange(n), node.shape)
        active = self.feature[node] >= 0
        while active.any():
            ni = node[active]
            go_left = X[rows[active], self.feature[ni]] <= self.threshold[ni]
            node[active] = np.where(go_left, self.left[ni], self.right[ni])
            active = self.feature[node] >= 0
        return self.weights @ self.value[node]


@dataclass
class RiskModel:
    """Trained ensemble: prior log-odds plus weighted regression trees."""

    config: LearningConfig
    trees: list[Tree]
    prior_log_odds: float
    metadata: dict = field(default_factory=dict)
    _packed: _PackedForest | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def d(self) -> int:
        return int(self.metadata["n_features"])

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if not self.trees:
            return np.full(X.shape[0], self.prior_log_odds)
        if self._packed is None:
            self._packed = _PackedForest.pack(self.trees)
        return self.prior_log_odds + self._packed.weighted_sum(X)

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected (n, {self.d}) matrix, got shape {X.shape}")
        return _sigmoid(self.raw_scores(X))

    def predict_proba(self, x) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size != self.d:
            raise ValueError(f"expected {self.d} values, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("input contains non-finite values")
        return float(self.predict_proba_batch(x.reshape(1, -1))[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba_batch(X) >= 0.5).astype(np.int64)

    def predict(self, x) -> int:
        return int(self.predict_proba(x) >= 0.5)

    def to_json(self) -> str:
        doc = {
            "version": MODEL_FORMAT_VERSION,
            "config": self.config.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
            "metadata": {**self.metadata, "prior_log_odds": self.prior_log_odds},
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "RiskModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {doc.get('version')!r}")
        metadata = dict(doc["metadata"])
        prior = float(metadata.pop("prior_log_odds"))
        return cls(
            config=LearningConfig(**doc["config"]),
            trees=[Tree.from_dict(t) for t in doc["trees"]],
            prior_log_odds=prior,
            metadata=metadata,
        )

    @classmethod
    def load(cls, path: str | Path) -> "RiskModel":
        return cls.from_json(Path(path).read_text())


def stratified_split(y: np.ndarray, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffle-and-cut holdout. Preserves the class ratio within
    one record per class."""
    if not 0 < fraction < 1:
        raise TrainingError(f"holdout fraction must be in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    test_parts = []
    train_parts = []
    for c in np.unique(y):
        ids = np.nonzero(y == c)[0]
        perm = rng.permutation(ids)
        k = int(round(ids.size * fraction))
        test_parts.append(perm[:k])
        train_parts.append(perm[k:])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    if train.size == 0 or test.size == 0:
        raise TrainingError("degenerate split: empty train or test partition")
    return train, test


def train(
    dataset: Dataset,
    config: LearningConfig | None = None,
    split: SplitSpec | None = None,
) -> RiskModel:
    """Fit the booster on a stratified holdout split of the labeled dataset."""
    config = config or LearningConfig()
    split = split or SplitSpec()
    if dataset.labels is None:
        raise TrainingError("dataset has no labels")
    y = dataset.labels
    if len(dataset) < 2:
        raise TrainingError("need at least 2 records to train")
    if np.unique(y).size < 2:
        raise TrainingError("dataset contains a single class; need both outcomes")
    train_idx, test_idx = stratified_split(y, split.holdout_fraction, split.seed)
    X_tr, y_tr = dataset.matrix[train_idx], y[train_idx]
    X_te, y_te = dataset.matrix[test_idx], y[test_idx]
    if np.unique(y_tr).size < 2:
        raise TrainingError("degenerate split: training partition lost a class")

    p0 = float(y_tr.mean())
    prior = math.log(p0 / (1.0 - p0))
    F = np.full(y_tr.size, prior)
    trees: list[Tree] = []
    yf = y_tr.astype(np.float64)
    for _ in range(config.n_trees):
        p = _sigmoid(F)
        g = yf - p
        h = p * (1.0 - p)
        feat, thr, left, right, value = _TreeBuilder(
            X_tr, g, h, config.max_depth, config.min_samples_leaf
        ).build()
        tree = Tree(
            feature=np.array(feat, dtype=np.int64),
            threshold=np.array(thr, dtype=np.float64),
            left=np.array(left, dtype=np.int64),
            right=np.array(right, dtype=np.int64),
            value=np.array(value, dtype=np.float64),
            weight=config.learning_rate,
        )
        F += tree.weight * tree.predict_batch(X_tr)
        trees.append(tree)

    model = RiskModel(
        config=config,
        trees=trees,
        prior_log_odds=prior,
        metadata={
            "n_features": dataset.schema.d,
            "feature_names": list(dataset.schema.names),
            "n_records": len(dataset),
            "n_train": int(train_idx.size),
            "n_test": int(test_idx.size),
            "split_seed": split.seed,
            "holdout_fraction": split.holdout_fraction,
        },
    )
    acc = float((model.predict_batch(X_te) == y_te).mean())
    model.metadata["test_accuracy"] = acc
    return model
