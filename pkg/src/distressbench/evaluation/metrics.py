"""Imbalance-aware metrics and F1-optimal threshold calibration."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import MetricError, ShapeError


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ShapeError(f"{scores.shape[0]} scores vs {labels.shape[0]} labels")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return scores, labels.astype(np.int64)


def roc_auc(scores, labels) -> float:
    """Rank-based ROC-AUC with average ranks for ties.

    Equals P(score+ > score-) + 0.5 P(score+ == score-). Raises
    :class:`MetricError` unless both classes are present.
    """
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC-AUC is undefined with a single class")
    ranks = rankdata(scores, method="average")
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class ConfusionMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    def to_dict(self) -> dict:
        return asdict(self)


def confusion_metrics(scores, labels, threshold: float) -> ConfusionMetrics:
    """Counts and rates for ``predict positive iff score >= threshold``.

    Zero-division conventions: precision is 0 with no predicted positives,
    recall is 0 with no actual positives, F1 is 0 when precision + recall is 0.
    """
    scores, labels = _check(scores, labels)
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    n = tp + fp + tn + fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ConfusionMetrics((tp + tn) / n if n else 0.0, precision, recall, f1, tp, fp, tn, fn)


def f1_scan(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """F1 at every unique score used as threshold. Returns (thresholds ascending, f1)."""
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    uniq, inverse = np.unique(scores, return_inverse=True)
    pos_per = np.bincount(inverse, weights=labels, minlength=uniq.size)
    all_per = np.bincount(inverse, minlength=uniq.size)
    # counts of rows with score >= uniq[i]
    tp = np.cumsum(pos_per[::-1])[::-1]
    predicted = np.cumsum(all_per[::-1])[::-1]
    # F1 = 2tp / (predicted + n_pos); integer operands keep equal ratios bit-equal
    f1 = 2.0 * tp / (predicted + n_pos)
    return uniq, f1


def calibrate_threshold(scores, labels) -> float:
    """Threshold among the unique scores that maximizes F1; ties go to the smallest."""
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise MetricError("threshold calibration needs both classes")
    thresholds, f1 = f1_scan(scores, labels)
    best = np.flatnonzero(f1 == f1.max())
    return float(thresholds[best[0]])
