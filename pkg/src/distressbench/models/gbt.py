"""Gradient-boosted regression trees on the logistic loss.

Each round fits a tree to the loss gradients with second-order (Newton)
split gains and leaf values ``-G / (H + lambda)``. Features are bucketed once
up front: columns with at most ``max_bins`` distinct values keep one bucket per
value (exact greedy search), wider columns use quantile cut points. Trees grow
best-first, which reproduces depth-wise growth when ``max_leaves`` is unset.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any

import numba
import numpy as np

from ..errors import ConfigError, ShapeError
from .base import check_predict_data, check_training_data, sigmoid

HESSIAN_FLOOR = 1e-16
_MIN_GAIN = 1e-12


@numba.njit(cache=True)
def _build_histogram(codes, rows, grad, hess, n_bins_max):
    n_features = codes.shape[1]
    hg = np.zeros((n_features, n_bins_max))
    hh = np.zeros((n_features, n_bins_max))
    for i in rows:
        g = grad[i]
        h = hess[i]
        for f in range(n_features):
            b = codes[i, f]
            hg[f, b] += g
            hh[f, b] += h
    return hg, hh


@numba.njit(cache=True)
def _best_split(hg, hh, n_bins, reg_lambda, min_child_weight):
    n_features = hg.shape[0]
    best_gain = _MIN_GAIN
    best_f = -1
    best_b = -1
    for f in range(n_features):
        G = 0.0
        H = 0.0
        for b in range(n_bins[f]):
            G += hg[f, b]
            H += hh[f, b]
        parent = G * G / (max(H, HESSIAN_FLOOR) + reg_lambda)
        gl = 0.0
        hl = 0.0
        for b in range(n_bins[f] - 1):
            gl += hg[f, b]
            hl += hh[f, b]
            hr = H - hl
            if hl < min_child_weight or hr < min_child_weight:
                continue
            gr = G - gl
            gain = gl * gl / (max(hl, HESSIAN_FLOOR) + reg_lambda) + gr * gr / (max(hr, HESSIAN_FLOOR) + reg_lambda) - parent
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_b = b
    return best_gain, best_f, best_b


@numba.njit(cache=True)
def _predict_trees(X, feature, threshold, left, right, value, roots):
    n = X.shape[0]
    out = np.zeros(n)
    for t in range(roots.shape[0]):
        root = roots[t]
        for i in range(n):
            node = root
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] += value[node]
    return out


def make_bin_edges(X: np.ndarray, max_bins: int) -> list[np.ndarray]:
    """Per-column cut points; ``x <= edges[b]`` goes left of a split at bucket ``b``."""
    edges = []
    q = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
    for col in np.ascontiguousarray(X.T):
        s = np.sort(col)
        uniq = s[np.r_[True, s[1:] != s[:-1]]]
        if uniq.size <= max_bins:
            e = (uniq[:-1] + uniq[1:]) / 2.0
        else:
            pos = q * (s.size - 1)
            lo = np.floor(pos).astype(np.int64)
            hi = np.minimum(lo + 1, s.size - 1)
            e = np.unique(s[lo] + (pos - lo) * (s[hi] - s[lo]))
        edges.append(e)
    return edges


@numba.njit(cache=True)
def _bin_columns(XT, table, codes_t):
    # table rows are padded with +inf to a power-of-two width; the fixed-step
    # search counts edges < x, i.e. searchsorted(side="left")
    d, n = XT.shape
    width = table.shape[1]
    for j in range(d):
        row = table[j]
        for i in range(n):
            x = XT[j, i]
            pos = 0
            step = width >> 1
            while step > 0:
                pos += step * (row[pos + step - 1] < x)
                step >>= 1
            pos += row[pos] < x
            codes_t[j, i] = pos


def bin_matrix(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    """Bucket codes, row-major (rows contiguous) for the histogram kernel."""
    counts = np.array([len(e) for e in edges], dtype=np.int64)
    n_bins_max = int(counts.max()) + 1
    dtype = np.uint8 if n_bins_max <= 256 else (np.uint16 if n_bins_max <= 65536 else np.int32)
    width = 1
    while width < n_bins_max:
        width <<= 1
    table = np.full((len(edges), width), np.inf)
    for j, e in enumerate(edges):
        table[j, : len(e)] = e
    codes_t = np.empty((X.shape[1], X.shape[0]), dtype=dtype)
    _bin_columns(np.ascontiguousarray(X.T, dtype=float), table, codes_t)
    return np.ascontiguousarray(codes_t.T)


@dataclass
class _Tree:
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_leaf(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1


class GradientBoostedTrees:
    """Logistic-loss boosting.

    Parameters follow the usual names: ``n_estimators``, ``max_depth`` (None
    for unlimited), ``learning_rate``, L2 leaf penalty ``reg_lambda``,
    ``min_child_weight`` (minimum hessian per child), ``max_leaves`` (None for
    unlimited) and ``max_bins`` per feature.
    """

    family = "gbt"

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int | None = 3,
        learning_rate: float = 0.1,
        reg_lambda: float = 1.0,
        min_child_weight: float = 1.0,
        max_leaves: int | None = None,
        max_bins: int = 256,
        seed: int = 42,
    ):
        if n_estimators < 1:
            raise ConfigError("n_estimators must be >= 1")
        if learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if max_depth is not None and max_depth < 1:
            raise ConfigError("max_depth must be >= 1 or None")
        if max_leaves is not None and max_leaves < 2:
            raise ConfigError("max_leaves must be >= 2 or None")
        if not 2 <= max_bins <= 65536:
            raise ConfigError("max_bins must be in [2, 65536]")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.max_leaves = max_leaves
        self.max_bins = max_bins
        self.seed = seed
        self.base_score: float | None = None
        self.n_features: int | None = None
        self.train_loss_: list[float] = []
        self._arrays: tuple | None = None

    def get_params(self) -> dict[str, Any]:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "reg_lambda": self.reg_lambda,
            "min_child_weight": self.min_child_weight,
            "max_leaves": self.max_leaves,
            "max_bins": self.max_bins,
            "seed": self.seed,
        }

    def fit(self, X, y) -> GradientBoostedTrees:
        X, y = check_training_data(X, y)
        n, d = X.shape
        edges = make_bin_edges(X, self.max_bins)
        codes = bin_matrix(X, edges)
        n_bins = np.array([len(e) + 1 for e in edges], dtype=np.int64)
        n_bins_max = int(n_bins.max())

        rate = y.mean()
        self.base_score = float(np.log(rate / (1.0 - rate)))
        raw = np.full(n, self.base_score)
        all_rows = np.arange(n, dtype=np.int64)
        trees = []
        self.train_loss_ = [_logloss(y, raw)]
        for _ in range(self.n_estimators):
            p = sigmoid(raw)
            grad = p - y
            hess = p * (1.0 - p)
            tree = self._grow(codes, edges, n_bins, n_bins_max, all_rows, grad, hess, raw)
            trees.append(tree)
            self.train_loss_.append(_logloss(y, raw))
        self.n_features = d
        self._pack(trees)
        return self

    def _grow(self, codes, edges, n_bins, n_bins_max, rows, grad, hess, raw) -> _Tree:
        tree = _Tree()
        lam, mcw, lr = self.reg_lambda, self.min_child_weight, self.learning_rate

        def leaf_value(node_rows) -> float:
            G = grad[node_rows].sum()
            H = hess[node_rows].sum()
            return -G / (max(H, HESSIAN_FLOOR) + lam)

        hg, hh = _build_histogram(codes, rows, grad, hess, n_bins_max)
        root = tree.add_leaf(leaf_value(rows))
        heap: list = []
        pending = {}
        counter = 0

        def consider(node, node_rows, depth, hist):
            nonlocal counter
            if self.max_depth is not None and depth >= self.max_depth:
                return
            gain, f, b = _best_split(hist[0], hist[1], n_bins, lam, mcw)
            if f < 0:
                return
            # ties: earlier candidates (lower counter) pop first
            heapq.heappush(heap, (-gain, counter, node))
            pending[node] = (node_rows, depth, hist, f, b)
            counter += 1

        consider(root, rows, 0, (hg, hh))
        n_leaves = 1
        while heap and (self.max_leaves is None or n_leaves < self.max_leaves):
            _, _, node = heapq.heappop(heap)
            node_rows, depth, (pg, ph), f, b = pending.pop(node)
            go_left = codes[node_rows, f] <= b
            lrows, rrows = node_rows[go_left], node_rows[~go_left]
            small, large = (lrows, rrows) if lrows.size <= rrows.size else (rrows, lrows)
            sg, sh = _build_histogram(codes, small, grad, hess, n_bins_max)
            small_hist, large_hist = (sg, sh), (pg - sg, ph - sh)
            lhist, rhist = (small_hist, large_hist) if small is lrows else (large_hist, small_hist)
            tree.feature[node] = int(f)
            tree.threshold[node] = float(edges[f][b])
            lnode = tree.add_leaf(leaf_value(lrows))
            rnode = tree.add_leaf(leaf_value(rrows))
            tree.left[node], tree.right[node] = lnode, rnode
            n_leaves += 1
            consider(lnode, lrows, depth + 1, lhist)
            consider(rnode, rrows, depth + 1, rhist)

        # shrink leaf values and update training scores by leaf membership
        stack = [(root, rows)]
        while stack:
            node, node_rows = stack.pop()
            if tree.feature[node] < 0:
                tree.value[node] *= lr
                raw[node_rows] += tree.value[node]
            else:
                # recover membership from the stored threshold on raw codes
                f = tree.feature[node]
                b = int(np.searchsorted(edges[f], tree.threshold[node], side="left"))
                go_left = codes[node_rows, f] <= b
                stack.append((tree.right[node], node_rows[~go_left]))
                stack.append((tree.left[node], node_rows[go_left]))
        return tree

    def _pack(self, trees: list[_Tree]) -> None:
        offsets = np.cumsum([0] + [len(t.feature) for t in trees[:-1]])
        feature = np.concatenate([np.array(t.feature, dtype=np.int64) for t in trees])
        threshold = np.concatenate([np.array(t.threshold, dtype=float) for t in trees])
        value = np.concatenate([np.array(t.value, dtype=float) for t in trees])
        left = np.concatenate([np.where(np.array(t.left) >= 0, np.array(t.left) + o, -1) for t, o in zip(trees, offsets)])
        right = np.concatenate(
            [np.where(np.array(t.right) >= 0, np.array(t.right) + o, -1) for t, o in zip(trees, offsets)]
        )
        self._arrays = (feature, threshold, left.astype(np.int64), right.astype(np.int64), value, offsets.astype(np.int64))

    @property
    def n_trees(self) -> int:
        return 0 if self._arrays is None else len(self._arrays[5])

    def decision_function(self, X) -> np.ndarray:
        if self._arrays is None:
            raise RuntimeError("model is not fitted")
        X = check_predict_data(X, self.n_features)
        return self.base_score + _predict_trees(X, *self._arrays)

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def state_dict(self) -> dict:
        feature, threshold, left, right, value, roots = self._arrays
        return {
            "base_score": self.base_score,
            "n_features": self.n_features,
            "feature": feature.tolist(),
            "threshold": threshold.tolist(),
            "left": left.tolist(),
            "right": right.tolist(),
            "value": value.tolist(),
            "roots": roots.tolist(),
        }

    def load_state(self, state: dict) -> GradientBoostedTrees:
        self.base_score = state["base_score"]
        self.n_features = state["n_features"]
        self._arrays = (
            np.array(state["feature"], dtype=np.int64),
            np.array(state["threshold"], dtype=float),
            np.array(state["left"], dtype=np.int64),
            np.array(state["right"], dtype=np.int64),
            np.array(state["value"], dtype=float),
            np.array(state["roots"], dtype=np.int64),
        )
        return self


def _logloss(y: np.ndarray, raw: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


def fit_gbt(X, y, params: dict | None = None) -> GradientBoostedTrees:
    return GradientBoostedTrees(**(params or {})).fit(X, y)
