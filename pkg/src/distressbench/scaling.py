"""Wrappers that scale a capacity-limited learner to large training sets.

Two strategies: route rows through a shallow gini tree and fit one learner per
leaf, or fit learners on bootstrap subsets and take a majority vote.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import numpy as np

from .errors import CapacityError, ConfigError, FitError, ShapeError
from .models.base import check_predict_data
from .models.gbt import GradientBoostedTrees


class LeafLearner(Protocol):
    max_fit_rows: int

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LeafLearner": ...

    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...


LearnerFactory = Callable[[], LeafLearner]


def _check_capacity(learner, n_rows: int) -> None:
    if n_rows > learner.max_fit_rows:
        raise CapacityError(f"{type(learner).__name__} accepts at most {learner.max_fit_rows} rows, got {n_rows}")


class KNNLeafLearner:
    """Distance-weighted k-nearest-neighbour scorer: fitting memorizes the rows."""

    family = "knn"

    def __init__(self, k: int = 64, max_fit_rows: int = 10_000, chunk_size: int = 2048):
        if k < 1:
            raise ConfigError("k must be >= 1")
        self.k = k
        self.max_fit_rows = max_fit_rows
        self.chunk_size = chunk_size
        self._X: np.ndarray | None = None
        self._y: np.ndarray | None = None

    def get_params(self) -> dict[str, Any]:
        return {"k": self.k, "max_fit_rows": self.max_fit_rows}

    def fit(self, X, y) -> KNNLeafLearner:
        X = np.ascontiguousarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise ShapeError(f"bad training shapes {X.shape} / {y.shape}")
        _check_capacity(self, X.shape[0])
        self._X, self._y = X, y
        self._sq = np.einsum("ij,ij->i", X, X)
        return self

    def predict_proba(self, X) -> np.ndarray:
        if self._X is None:
            raise RuntimeError("learner is not fitted")
        X = check_predict_data(X, self._X.shape[1])
        k = min(self.k, self._X.shape[0])
        out = np.empty(X.shape[0])
        if np.all(self._y == self._y[0]):
            out[:] = self._y[0]
            return out
        for start in range(0, X.shape[0], self.chunk_size):
            chunk = X[start : start + self.chunk_size]
            d2 = np.einsum("ij,ij->i", chunk, chunk)[:, None] + self._sq[None, :] - 2.0 * chunk @ self._X.T
            np.maximum(d2, 0.0, out=d2)
            if k < d2.shape[1]:
                nn = np.argpartition(d2, k - 1, axis=1)[:, :k]
            else:
                nn = np.broadcast_to(np.arange(d2.shape[1]), d2.shape)
            dist = np.sqrt(np.take_along_axis(d2, nn, axis=1))
            w = 1.0 / (dist + 1e-9)
            out[start : start + chunk.shape[0]] = (w * self._y[nn]).sum(axis=1) / w.sum(axis=1)
        return out


class GBTLeafLearner:
    """Boosted trees behind the leaf contract; a single-class leaf predicts that class."""

    family = "gbt"

    def __init__(self, max_fit_rows: int = 10_000, **params):
        self.max_fit_rows = max_fit_rows
        self.params = params
        self._model: GradientBoostedTrees | None = None
        self._constant: float | None = None
        self._n_features: int | None = None

    def get_params(self) -> dict[str, Any]:
        return dict(self.params, max_fit_rows=self.max_fit_rows)

    def fit(self, X, y) -> GBTLeafLearner:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).ravel()
        _check_capacity(self, X.shape[0])
        self._n_features = X.shape[1]
        if np.unique(y).size < 2:
            self._constant = float(y[0])
            self._model = None
        else:
            self._constant = None
            self._model = GradientBoostedTrees(**self.params).fit(X, y)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = check_predict_data(X, self._n_features)
        if self._constant is not None:
            return np.full(X.shape[0], self._constant)
        return self._model.predict_proba(X)


# --- partition-then-predict -------------------------------------------------


@dataclass
class Router:
    """Axis-aligned tree in flat arrays; ``leaf[i] >= 0`` marks leaves."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    leaf: list[int] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)

    def add(self, depth: int) -> int:
        for lst, v in ((self.feature, -1), (self.threshold, 0.0), (self.left, -1), (self.right, -1), (self.leaf, -1)):
            lst.append(v)
        self.depth.append(depth)
        return len(self.feature) - 1

    def route(self, X: np.ndarray) -> np.ndarray:
        """Leaf index of every row (x <= threshold goes left)."""
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            inner = feature[node] >= 0
            if not inner.any():
                break
            idx = np.flatnonzero(inner)
            nd = node[idx]
            go_left = X[idx, feature[nd]] <= threshold[nd]
            node[idx] = np.where(go_left, left[nd], right[nd])
        return np.asarray(self.leaf)[node]

    @property
    def n_leaves(self) -> int:
        return sum(1 for v in self.leaf if v >= 0)


def best_gini_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float, float] | None:
    """Exact best split ``(feature, threshold, impurity decrease)`` or None.

    Impurity is the row-weighted gini sum of the children. Equal decreases keep
    the lowest feature index, then the lowest threshold.
    """
    n, d = X.shape
    pos = float(y.sum())
    parent = 2.0 * pos * (n - pos) / n
    if parent == 0.0:
        return None
    best = None
    for j in range(d):
        order = np.argsort(X[:, j], kind="mergesort")
        xs = X[order, j]
        cut = np.flatnonzero(xs[1:] != xs[:-1])  # split after position cut
        if cut.size == 0:
            continue
        cum = np.cumsum(y[order])
        n_l = (cut + 1).astype(float)
        p_l = cum[cut]
        n_r = n - n_l
        p_r = pos - p_l
        child = 2.0 * (p_l * (n_l - p_l) / n_l + p_r * (n_r - p_r) / n_r)
        i = int(np.argmin(child))
        gain = parent - float(child[i])
        if gain > 1e-12 and (best is None or gain > best[2]):
            best = (j, float((xs[cut[i]] + xs[cut[i] + 1]) / 2.0), gain)
    return best


@dataclass
class PartitionedModel:
    router: Router
    leaf_models: list
    leaf_row_counts: list[int]
    leaf_fit_rows: list[int]
    leaf_positive_counts: list[int]
    n_features: int

    def predict_proba(self, X) -> np.ndarray:
        return predict_partitioned(self, X)

    def report(self) -> dict:
        leaf_depth = {leaf: self.router.depth[i] for i, leaf in enumerate(self.router.leaf) if leaf >= 0}
        return {
            "n_leaves": len(self.leaf_models),
            "leaves": [
                {
                    "leaf": i,
                    "depth": leaf_depth[i],
                    "rows": self.leaf_row_counts[i],
                    "fit_rows": self.leaf_fit_rows[i],
                    "positives": self.leaf_positive_counts[i],
                    "subsampled": self.leaf_fit_rows[i] < self.leaf_row_counts[i],
                }
                for i in range(len(self.leaf_models))
            ],
        }

    def write_report(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.report(), indent=2, sort_keys=True) + "\n")


def grow_router(X: np.ndarray, y: np.ndarray, min_samples_split: int = 10_000, max_depth: int = 16):
    """Greedy gini tree; returns ``(router, rows per leaf)``."""
    if min_samples_split < 2:
        raise ConfigError("min_samples_split must be >= 2")
    router = Router()
    leaf_rows: list[np.ndarray] = []
    stack = [(router.add(0), np.arange(X.shape[0]), 0)]
    # depth-first, left before right, so leaf numbering is deterministic
    while stack:
        node, rows, depth = stack.pop()
        split = None
        if rows.size >= min_samples_split and depth < max_depth:
            split = best_gini_split(X[rows], y[rows])
        if split is None:
            router.leaf[node] = len(leaf_rows)
            leaf_rows.append(rows)
            continue
        j, thr, _ = split
        go_left = X[rows, j] <= thr
        lnode, rnode = router.add(depth + 1), router.add(depth + 1)
        router.feature[node], router.threshold[node] = j, thr
        router.left[node], router.right[node] = lnode, rnode
        stack.append((rnode, rows[~go_left], depth + 1))
        stack.append((lnode, rows[go_left], depth + 1))
    return router, leaf_rows


def fit_partitioned(
    X,
    y,
    learner_factory: LearnerFactory,
    min_samples_split: int = 10_000,
    max_depth: int = 16,
    seed: int = 42,
) -> PartitionedModel:
    """Route the training rows through a gini tree and fit one learner per leaf.

    A leaf holding more rows than the learner accepts is subsampled (seeded,
    original row order kept) and the reduced size is recorded.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y).ravel()
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"bad training shapes {X.shape} / {y.shape}")
    router, leaf_rows = grow_router(X, y, min_samples_split, max_depth)
    rng = np.random.default_rng(seed)
    models, fit_counts = [], []
    for i, rows in enumerate(leaf_rows):
        try:
            learner = learner_factory()
            fit_rows = rows
            if rows.size > learner.max_fit_rows:
                fit_rows = np.sort(rng.choice(rows, size=learner.max_fit_rows, replace=False))
            models.append(learner.fit(X[fit_rows], y[fit_rows]))
        except Exception as exc:
            raise FitError(f"leaf {i} ({rows.size} rows) failed to fit: {exc}") from exc
        fit_counts.append(int(fit_rows.size))
    return PartitionedModel(
        router,
        models,
        [int(r.size) for r in leaf_rows],
        fit_counts,
        [int(y[r].sum()) for r in leaf_rows],
        X.shape[1],
    )


def predict_partitioned(model: PartitionedModel, X) -> np.ndarray:
    X = check_predict_data(X, model.n_features)
    leaves = model.router.route(X)
    out = np.empty(X.shape[0])
    for i, leaf_model in enumerate(model.leaf_models):
        rows = np.flatnonzero(leaves == i)
        if rows.size:
            out[rows] = leaf_model.predict_proba(X[rows])
    return out


# --- bootstrap ensemble -----------------------------------------------------


@dataclass
class BootstrapEnsemble:
    m: int
    n: int
    seed: int
    member_models: list
    subsets: list[np.ndarray]
    n_features: int
    ties_positive: bool = True


@dataclass(frozen=True)
class EnsemblePrediction:
    votes: np.ndarray
    mean_probability: np.ndarray
    vote_fraction: np.ndarray


def fit_bootstrap_ensemble(
    X, y, learner_factory: LearnerFactory, m: int = 8, n: int = 10_000, seed: int = 42, ties_positive: bool = True
) -> BootstrapEnsemble:
    """Fit ``m`` learners, each on ``n`` rows drawn with replacement."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y).ravel()
    if m < 1 or n < 1:
        raise ConfigError("m and n must be >= 1")
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"bad training shapes {X.shape} / {y.shape}")
    rng = np.random.default_rng(seed)
    members, subsets = [], []
    for i in range(m):
        learner = learner_factory()
        if n > learner.max_fit_rows:
            raise ConfigError(f"subset size {n} exceeds learner capacity {learner.max_fit_rows}")
        rows = rng.integers(0, X.shape[0], size=n)
        try:
            members.append(learner.fit(X[rows], y[rows]))
        except Exception as exc:
            raise FitError(f"ensemble member {i} failed to fit: {exc}") from exc
        subsets.append(rows)
    return BootstrapEnsemble(m, n, seed, members, subsets, X.shape[1], ties_positive)


def majority_vote(labels: np.ndarray, ties_positive: bool = True) -> np.ndarray:
    """Column-wise majority of a (members, rows) 0/1 matrix."""
    labels = np.asarray(labels)
    yes = labels.sum(axis=0)
    twice = 2 * yes
    m = labels.shape[0]
    return ((twice >= m) if ties_positive else (twice > m)).astype(np.int8)


def predict_ensemble(ens: BootstrapEnsemble, X, member_threshold: float = 0.5) -> EnsemblePrediction:
    X = check_predict_data(X, ens.n_features)
    probs = np.vstack([member.predict_proba(X) for member in ens.member_models])
    labels = (probs >= member_threshold).astype(np.int8)
    return EnsemblePrediction(
        votes=majority_vote(labels, ens.ties_positive),
        mean_probability=probs.mean(axis=0),
        vote_fraction=labels.mean(axis=0),
    )
