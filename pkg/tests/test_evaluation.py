from __future__ import annotations

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distressbench.errors import ConfigError, MetricError, ReportError, ShapeError, SplitError
from distressbench.evaluation import (
    SplitPlan,
    build_report,
    calibrate_threshold,
    confusion_metrics,
    evaluate_scores,
    f1_scan,
    horizon_summary_csv,
    proportional_counts,
    roc_auc,
    stratified_split,
    stratified_subsample,
    time_inference,
)

from oracles import count_confusion, exhaustive_best_f1, f1_from_counts, pairwise_auc

scores_labels = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]) | st.floats(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda y: 0 < sum(y) < len(y)),
    )
)


@given(scores_labels)
@settings(max_examples=150, deadline=None)
def test_roc_auc_matches_pairwise(sl):
    s, y = sl
    assert abs(roc_auc(s, y) - pairwise_auc(s, y)) < 1e-12


@given(scores_labels, st.floats(0, 1))
@settings(max_examples=150, deadline=None)
def test_confusion_matches_count(sl, t):
    s, y = sl
    m = confusion_metrics(s, y, t)
    tp, fp, tn, fn = count_confusion(s, y, t)
    assert (m.tp, m.fp, m.tn, m.fn) == (tp, fp, tn, fn)
    assert m.f1 == pytest.approx(f1_from_counts(tp, fp, fn), abs=0)


@given(scores_labels)
@settings(max_examples=150, deadline=None)
def test_calibration_reaches_best_f1(sl):
    s, y = sl
    t = calibrate_threshold(s, y)
    assert confusion_metrics(s, y, t).f1 == pytest.approx(exhaustive_best_f1(s, y), rel=1e-12)
    # smallest among tied thresholds
    best = confusion_metrics(s, y, t).f1
    assert all(confusion_metrics(s, y, u).f1 < best - 1e-15 for u in set(s) if u < t)


def test_roc_auc_ties_and_perfect():
    assert roc_auc([0.5, 0.5], [0, 1]) == 0.5
    assert roc_auc([0.1, 0.9], [0, 1]) == 1.0
    assert roc_auc([0.9, 0.1], [0, 1]) == 0.0


def test_single_class_errors():
    with pytest.raises(MetricError):
        roc_auc([0.1, 0.2], [1, 1])
    with pytest.raises(MetricError):
        calibrate_threshold([0.1, 0.2], [0, 0])


def test_shape_and_label_checks():
    with pytest.raises(ShapeError):
        roc_auc([0.1], [0, 1])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [0, 2])


def test_zero_division_conventions():
    m = confusion_metrics([0.1, 0.2], [0, 1], 0.9)
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)
    m = confusion_metrics([0.1, 0.2], [0, 0], 0.0)
    assert m.recall == 0.0 and m.accuracy == 0.0


def test_threshold_is_inclusive():
    assert confusion_metrics([0.5], [1], 0.5).tp == 1


def test_f1_scan_sorted():
    t, f = f1_scan([0.3, 0.1, 0.2], [1, 0, 1])
    assert list(t) == [0.1, 0.2, 0.3]
    assert f[1] == 1.0


def test_proportional_counts():
    assert proportional_counts(np.array([996, 4]), 100).tolist() == [100, 0]
    assert proportional_counts(np.array([50, 50]), 11).tolist() == [6, 5]
    assert proportional_counts(np.array([3, 1]), 10).tolist() == [3, 1]


def test_stratified_split_properties():
    y = np.r_[np.ones(40, int), np.zeros(960, int)]
    s = stratified_split(y, SplitPlan(200, 0.25, seed=1))
    parts = [s.train, s.validation, s.test]
    assert sum(len(p) for p in parts) == 1000
    assert len(np.unique(np.concatenate(parts))) == 1000
    assert len(s.test) == 200 and y[s.test].sum() == 8
    assert len(s.validation) == 200 and y[s.validation].sum() == 8
    again = stratified_split(y, SplitPlan(200, 0.25, seed=1))
    assert all(np.array_equal(a, b) for a, b in zip(parts, [again.train, again.validation, again.test]))


def test_split_errors():
    with pytest.raises(ConfigError):
        stratified_split(np.array([0, 1]), SplitPlan(5))
    with pytest.raises(SplitError):
        stratified_split(np.zeros(10, int), SplitPlan(2))


def test_subsample():
    y = np.r_[np.ones(10, int), np.zeros(90, int)]
    idx = stratified_subsample(y, 20, 3)
    assert len(idx) == 20 and y[idx].sum() == 2 and np.all(np.diff(idx) > 0)
    assert len(stratified_subsample(y, 500, 3)) == 100


def _results():
    y = np.array([0, 0, 1, 1])
    return [
        evaluate_scores("a", 0, [0.1, 0.2, 0.8, 0.9], y, 0.5, test_fingerprint="x"),
        evaluate_scores("b", 0, [0.1, 0.6, 0.4, 0.9], y, 0.5, test_fingerprint="x"),
    ]


def test_report_best_and_formats():
    rep = build_report(_results(), 0)
    assert rep.best["f1"] == ["a"]
    assert rep.to_csv().splitlines()[0] == "Prediction Horizon,Model,Accuracy,Precision,Recall,F1-score,ROC-AUC"
    assert "**1.000**" in rep.render_text()
    assert '"horizon": 0' in rep.to_json()
    grid = horizon_summary_csv([rep])
    assert grid.splitlines()[1] == "a,1.000/1.000"


def test_report_rejects_mixed_inputs():
    a, b = _results()
    b.test_fingerprint = "y"
    with pytest.raises(ReportError):
        build_report([a, b], 0)
    with pytest.raises(ReportError):
        build_report([a], 1)
    with pytest.raises(ReportError):
        build_report([], 0)


def test_timing_identity_and_delay():
    rep = time_inference(lambda b: time.sleep(0.01), list(range(64)), runs=5, warmup=1, hardware_note="test box")
    assert abs(rep.throughput * rep.mean - 64) <= 1e-9 * 64
    assert abs(rep.mean - 0.01) < 0.002
    row = rep.row("m")
    assert set(row) == {"Model", "Hardware", "Batch", "Time (s)", "Throughput (samples/s)"}
    assert row["Hardware"] == "test box"


def test_timing_errors():
    from distressbench.errors import TimingError

    with pytest.raises(ValueError):
        time_inference(lambda b: None, [], runs=1)
    with pytest.raises(TimingError):
        time_inference(lambda b: 1 / 0, [1], runs=1)
