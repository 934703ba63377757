from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from distressbench.errors import ShapeError
from distressbench.features.preprocess import UNSEEN_CODE, PreprocessStats, apply_preprocessor, fit_preprocessor


def _frame(rng, n=1000):
    x = rng.normal(5, 3, n)
    x[rng.random(n) < 0.1] = np.nan
    return pd.DataFrame(
        {
            "a": x,
            "b": rng.exponential(2, n),
            "const": np.full(n, 7.0),
            "cat": pd.Series(rng.choice(["x", "y", None], n), dtype=object),
        }
    )


def test_median_of_observed():
    stats = fit_preprocessor(pd.DataFrame({"a": [1.0, 2.0, np.nan, 100.0]}))
    assert stats.medians["a"] == 2.0


def test_medians_match_sort_oracle():
    rng = np.random.default_rng(0)
    f = _frame(rng)
    stats = fit_preprocessor(f)
    obs = np.sort(f["a"].dropna().to_numpy())
    k = obs.size
    oracle = obs[k // 2] if k % 2 else 0.5 * (obs[k // 2 - 1] + obs[k // 2])
    assert stats.medians["a"] == oracle


def test_standardized_train_moments():
    rng = np.random.default_rng(1)
    f = _frame(rng)
    stats = fit_preprocessor(f)
    X = apply_preprocessor(stats, f)
    for j, name in enumerate(stats.columns):
        if stats.stds[name] > 0:
            assert abs(X[:, j].mean()) < 1e-9
            assert abs(X[:, j].std() - 1) < 1e-9
    assert np.all(X[:, stats.columns.index("const")] == 0.0)


def test_raw_imputed_is_bit_identical():
    rng = np.random.default_rng(2)
    f = _frame(rng)
    stats = fit_preprocessor(f)
    X = apply_preprocessor(stats, f, "raw_imputed")
    a = f["a"].to_numpy()
    observed = ~np.isnan(a)
    assert np.array_equal(X[observed, 0], a[observed])
    assert np.all(X[~observed, 0] == stats.medians["a"])
    assert np.array_equal(X[:, 1], f["b"].to_numpy())


def test_categorical_codes():
    f = pd.DataFrame({"cat": pd.Series(["x", "y", None, "x"], dtype=object)})
    stats = fit_preprocessor(f)
    assert stats.encodings["cat"] == {"x": 1, "y": 2}
    test = pd.DataFrame({"cat": pd.Series(["y", "zzz", None], dtype=object)})
    assert apply_preprocessor(stats, test, "raw_imputed")[:, 0].tolist() == [2, UNSEEN_CODE, UNSEEN_CODE]


def test_all_missing_column():
    stats = fit_preprocessor(pd.DataFrame({"a": [np.nan, np.nan]}))
    assert stats.medians["a"] == 0.0 and stats.all_missing == ["a"]


def test_errors():
    with pytest.raises(ValueError):
        fit_preprocessor(pd.DataFrame({"a": []}))
    stats = fit_preprocessor(pd.DataFrame({"a": [1.0], "b": [2.0]}))
    with pytest.raises(ShapeError):
        apply_preprocessor(stats, pd.DataFrame({"b": [1.0], "a": [2.0]}))
    with pytest.raises(ValueError):
        apply_preprocessor(stats, pd.DataFrame({"a": [1.0], "b": [2.0]}), "scaled")


def test_stats_roundtrip():
    rng = np.random.default_rng(3)
    stats = fit_preprocessor(_frame(rng, 50))
    assert PreprocessStats.from_dict(stats.to_dict()) == stats


def test_train_stats_only():
    rng = np.random.default_rng(4)
    train, test = _frame(rng, 200), _frame(rng, 200)
    stats = fit_preprocessor(train)
    X = apply_preprocessor(stats, test)
    j = stats.columns.index("b")
    assert np.allclose(X[:, j], (test["b"] - stats.means["b"]) / stats.stds["b"])
