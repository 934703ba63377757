"""Per-horizon evaluation reports (JSON, Table-8-shaped CSV, text tables)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ReportError
from .metrics import ConfusionMetrics, confusion_metrics, roc_auc

METRIC_HEADER = ["Prediction Horizon", "Model", "Accuracy", "Precision", "Recall", "F1-score", "ROC-AUC"]
_METRIC_KEYS = ["accuracy", "precision", "recall", "f1", "roc_auc"]


@dataclass
class ModelResult:
    model: str
    horizon: int
    threshold: float
    metrics: ConfusionMetrics
    roc_auc: float
    n_rows: int
    test_fingerprint: str = ""
    parse_failures: int | None = None
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        m = self.metrics
        return {
            "model": self.model,
            "horizon": self.horizon,
            "accuracy": m.accuracy,
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
            "roc_auc": self.roc_auc,
            "threshold": self.threshold,
            "tp": m.tp,
            "fp": m.fp,
            "tn": m.tn,
            "fn": m.fn,
            "n_rows": self.n_rows,
            "parse_failures": self.parse_failures,
            **self.extra,
        }


def evaluate_scores(model: str, horizon: int, scores, labels, threshold: float, **kw) -> ModelResult:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    return ModelResult(
        model=model,
        horizon=horizon,
        threshold=float(threshold),
        metrics=confusion_metrics(scores, labels, threshold),
        roc_auc=roc_auc(scores, labels),
        n_rows=int(labels.size),
        **kw,
    )


@dataclass
class EvalReport:
    horizon: int
    rows: list[dict]
    best: dict[str, list[str]]

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "results": self.rows, "best": self.best}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def metric_rows(self) -> list[list[str]]:
        return [
            [f"h={self.horizon}", r["model"], *(f"{r[k]:.3f}" for k in _METRIC_KEYS)]
            for r in self.rows
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(METRIC_HEADER)
        writer.writerows(self.metric_rows())
        return buf.getvalue()

    def render_text(self) -> str:
        """Aligned text table; the best value in each metric column is wrapped in ``**``."""
        cells = []
        for r in self.rows:
            line = [f"h={self.horizon}", r["model"]]
            for k in _METRIC_KEYS:
                text = f"{r[k]:.3f}"
                line.append(f"**{text}**" if r["model"] in self.best[k] else text)
            cells.append(line)
        return _align([METRIC_HEADER, *cells])


def _align(table: list[list[str]]) -> str:
    widths = [max(len(row[j]) for row in table) for j in range(len(table[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table) + "\n"


def build_report(results: Sequence[ModelResult], horizon: int) -> EvalReport:
    """Combine per-model results for one horizon; flags the best model(s) per metric.

    All results must share the horizon and the test-set fingerprint.
    """
    if not results:
        raise ReportError("no model results to report")
    mismatched = [r.model for r in results if r.horizon != horizon]
    if mismatched:
        raise ReportError(f"results for horizon != {horizon}: {mismatched}")
    prints = {r.test_fingerprint for r in results}
    if len(prints) > 1:
        raise ReportError("models were evaluated on different test subsets")
    rows = [r.row() for r in results]
    best = {}
    for k in _METRIC_KEYS:
        top = max(round(r[k], 12) for r in rows)
        best[k] = [r["model"] for r in rows if round(r[k], 12) == top]
    return EvalReport(horizon, rows, best)


def horizon_summary_csv(reports: Sequence[EvalReport]) -> str:
    """Model x horizon grid of ``ROC-AUC / F1`` strings."""
    horizons = [r.horizon for r in reports]
    models: list[str] = []
    for rep in reports:
        for row in rep.rows:
            if row["model"] not in models:
                models.append(row["model"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["Model", *(f"h={h}" for h in horizons)])
    for model in models:
        line = [model]
        for rep in reports:
            hit = [r for r in rep.rows if r["model"] == model]
            line.append(f"{hit[0]['roc_auc']:.3f}/{hit[0]['f1']:.3f}" if hit else "")
        writer.writerow(line)
    return buf.getvalue()
