from __future__ import annotations

import json

import numpy as np
import pytest

from distressbench.errors import CapacityError, ConfigError, FitError
from distressbench.evaluation import roc_auc
from distressbench.scaling import (
    GBTLeafLearner,
    KNNLeafLearner,
    best_gini_split,
    fit_bootstrap_ensemble,
    fit_partitioned,
    grow_router,
    majority_vote,
    predict_ensemble,
    predict_partitioned,
)

from oracles import majority_oracle


def _data(seed=0, n=600, d=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = ((X[:, 0] > 0.3) & (X[:, 1] > -0.5)).astype(int)
    return X, y


def _gini_oracle(X, y):
    n = len(y)

    def g(mask):
        m = mask.sum()
        if m == 0:
            return 0.0
        p = y[mask].mean()
        return m * 2 * p * (1 - p)

    parent = g(np.ones(n, bool))
    best = None
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        for a, b in zip(vals[:-1], vals[1:]):
            t = (a + b) / 2
            gain = parent - g(X[:, j] <= t) - g(X[:, j] > t)
            if gain > 1e-12 and (best is None or gain > best[2] + 1e-12):
                best = (j, t, gain)
    return best


@pytest.mark.parametrize("seed", range(5))
def test_gini_split_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(40, 3)).astype(float)
    y = rng.integers(0, 2, 40)
    got, expect = best_gini_split(X, y), _gini_oracle(X, y)
    assert got[0] == expect[0] and got[1] == expect[1]
    assert got[2] == pytest.approx(expect[2], rel=1e-12)


def test_gini_split_pure_or_constant():
    assert best_gini_split(np.arange(4.0)[:, None], np.ones(4)) is None
    assert best_gini_split(np.ones((4, 2)), np.array([0, 1, 0, 1])) is None


def test_gini_tie_prefers_lowest_feature():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert best_gini_split(X, np.array([0, 1]))[0] == 0


def test_router_invariants():
    X, y = _data(1, n=3000)
    router, leaves = grow_router(X, y, min_samples_split=400, max_depth=6)
    rows = np.concatenate(leaves)
    assert np.array_equal(np.sort(rows), np.arange(3000))
    routed = router.route(X)
    for i, r in enumerate(leaves):
        assert np.all(routed[r] == i)
        depth = [router.depth[k] for k, v in enumerate(router.leaf) if v == i][0]
        assert r.size < 400 or np.unique(y[r]).size == 1 or depth == 6 or best_gini_split(X[r], y[r]) is None
    with pytest.raises(ConfigError):
        grow_router(X, y, min_samples_split=1)


def test_single_leaf_identity():
    X, y = _data(2, n=500)
    for factory in (lambda: KNNLeafLearner(k=15), lambda: GBTLeafLearner(n_estimators=10)):
        model = fit_partitioned(X, y, factory, min_samples_split=10_000)
        assert model.router.n_leaves == 1
        bare = factory().fit(X, y)
        assert np.array_equal(predict_partitioned(model, X), bare.predict_proba(X))


def test_partition_subsamples_large_leaves():
    X, y = _data(3, n=2000)
    model = fit_partitioned(X, y, lambda: KNNLeafLearner(k=5, max_fit_rows=300), min_samples_split=5000, seed=1)
    rep = model.report()
    assert rep["leaves"][0]["fit_rows"] == 300 and rep["leaves"][0]["subsampled"]
    again = fit_partitioned(X, y, lambda: KNNLeafLearner(k=5, max_fit_rows=300), min_samples_split=5000, seed=1)
    assert np.array_equal(model.predict_proba(X[:50]), again.predict_proba(X[:50]))


def test_partition_learns(tmp_path):
    X, y = _data(4, n=4000)
    Xt, yt = _data(5, n=1000)
    model = fit_partitioned(X, y, lambda: KNNLeafLearner(k=25), min_samples_split=800, max_depth=4)
    assert model.router.n_leaves > 1
    assert roc_auc(model.predict_proba(Xt), yt) > 0.95
    model.write_report(tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["n_leaves"] == model.router.n_leaves


def test_leaf_failure_names_leaf():
    class Broken:
        max_fit_rows = 10

        def fit(self, X, y):
            raise RuntimeError("boom")

    X, y = _data(6, n=20)
    with pytest.raises(FitError, match="leaf 0"):
        fit_partitioned(X, y, Broken, min_samples_split=100)


def test_capacity_enforced():
    X, y = _data(7, n=50)
    with pytest.raises(CapacityError):
        KNNLeafLearner(max_fit_rows=10).fit(X, y)
    with pytest.raises(ConfigError):
        fit_bootstrap_ensemble(X, y, lambda: KNNLeafLearner(max_fit_rows=10), m=2, n=20)


def test_single_member_ensemble_identity():
    X, y = _data(8, n=400)
    ens = fit_bootstrap_ensemble(X, y, lambda: KNNLeafLearner(k=9), m=1, n=300, seed=3)
    member = KNNLeafLearner(k=9).fit(X[ens.subsets[0]], y[ens.subsets[0]])
    pred = predict_ensemble(ens, X)
    p = member.predict_proba(X)
    assert np.array_equal(pred.mean_probability, p)
    assert np.array_equal(pred.votes, (p >= 0.5).astype(np.int8))


def test_ensemble_is_seeded_bootstrap():
    X, y = _data(9, n=400)
    a = fit_bootstrap_ensemble(X, y, lambda: KNNLeafLearner(k=5), m=3, n=400, seed=1)
    b = fit_bootstrap_ensemble(X, y, lambda: KNNLeafLearner(k=5), m=3, n=400, seed=1)
    assert all(np.array_equal(s, t) for s, t in zip(a.subsets, b.subsets))
    assert len(np.unique(a.subsets[0])) < 400  # drawn with replacement


def test_majority_vote_matches_counting_oracle():
    rng = np.random.default_rng(10)
    for _ in range(200):
        m, n = rng.integers(1, 9), rng.integers(1, 12)
        votes = rng.integers(0, 2, size=(m, n))
        for ties in (True, False):
            assert majority_vote(votes, ties).tolist() == majority_oracle(votes.tolist(), ties)


def test_knn_constant_leaf_and_exact_match():
    X = np.array([[0.0], [1.0], [2.0]])
    assert KNNLeafLearner(k=2).fit(X, [1, 1, 1]).predict_proba(X).tolist() == [1, 1, 1]
    p = KNNLeafLearner(k=1).fit(X, [0, 1, 0]).predict_proba(X)
    assert p.tolist() == [0.0, 1.0, 0.0]
