"""Distress rule and horizon-h dataset construction.

A company is distressed when its *last* report breaches all three thresholds
(strictly): equity/total_assets, EBITDA/total_assets and the current ratio.
A criterion whose denominator is missing or zero is not met. Companies whose
last report falls in the censor year are never labeled distressed.

For horizon ``h``, a distressed company with distress year ``d`` loses every
record with ``report_year > d - h``; its latest remaining record is the single
positive row. Everything else is negative.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .data.records import CompanyYearRecord, Panel
from .errors import ConfigError


@dataclass(frozen=True)
class DistressRule:
    equity_ta_max: float = 0.0
    ebitda_ta_max: float = 0.0
    current_ratio_max: float = 0.6
    censor_year: int = 2021

    def __post_init__(self) -> None:
        for name in ("equity_ta_max", "ebitda_ta_max", "current_ratio_max"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")


@dataclass(frozen=True)
class DistressOutcome:
    distressed: bool
    distress_year: int | None


def _ratio_below(num, den, limit) -> np.ndarray:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ok = np.isfinite(num) & np.isfinite(den) & (den != 0)
    out = np.zeros(num.shape, dtype=bool)
    out[ok] = num[ok] / den[ok] < limit
    return out


def breaches_rule(frame: pd.DataFrame, rule: DistressRule) -> np.ndarray:
    """Row-wise: do all three criteria hold (ignoring the censor year)?"""
    ta = frame["total_assets"].to_numpy(dtype=float)
    return (
        _ratio_below(frame["equity"], ta, rule.equity_ta_max)
        & _ratio_below(frame["ebitda"], ta, rule.ebitda_ta_max)
        & _ratio_below(frame["current_assets"], frame["current_liabilities"], rule.current_ratio_max)
    )


def detect_distress(history: Sequence[CompanyYearRecord], rule: DistressRule = DistressRule()) -> DistressOutcome:
    if not history:
        raise ValueError("history must contain at least one record")
    last = history[-1]
    s = last.statement

    def below(num, den, limit):
        if num is None or den is None or den == 0:
            return False
        return num / den < limit

    hit = (
        below(s.equity, s.total_assets, rule.equity_ta_max)
        and below(s.ebitda, s.total_assets, rule.ebitda_ta_max)
        and below(s.current_assets, s.current_liabilities, rule.current_ratio_max)
        and last.report_year != rule.censor_year
    )
    return DistressOutcome(bool(hit), last.report_year if hit else None)


def distress_years(panel: Panel, rule: DistressRule = DistressRule()) -> pd.Series:
    """Distress year per distressed company (indexed by company_id)."""
    frame = panel.frame
    if len(frame) == 0:
        return pd.Series([], dtype=np.int64)
    last = frame.groupby("company_id", sort=True).tail(1)
    hit = breaches_rule(last, rule) & (last["report_year"].to_numpy() != rule.censor_year)
    return pd.Series(last["report_year"].to_numpy()[hit], index=last["company_id"].to_numpy()[hit])


@dataclass
class HorizonDataset:
    """Labeled rows for one horizon.

    ``rows`` holds company_id, report_year, label and ``panel_row`` (the index
    of the source record in the panel frame, which is how feature vectors are
    looked up).
    """

    horizon: int
    rule: DistressRule
    rows: pd.DataFrame

    @property
    def labels(self) -> np.ndarray:
        return self.rows["label"].to_numpy()

    @property
    def class_counts(self) -> tuple[int, int]:
        pos = int(self.rows["label"].sum())
        return pos, len(self.rows) - pos

    def __len__(self) -> int:
        return len(self.rows)

    def manifest(self) -> dict:
        pos, neg = self.class_counts
        return {
            "horizon": self.horizon,
            "rule": asdict(self.rule),
            "total": len(self.rows),
            "n_positive": pos,
            "n_negative": neg,
        }

    def export(self, csv_path: str | Path, features: pd.DataFrame | None = None) -> Path:
        """Write rows (plus feature columns) as CSV and a manifest next to it."""
        csv_path = Path(csv_path)
        out = self.rows[["company_id", "report_year", "label"]].reset_index(drop=True)
        if features is not None:
            feats = features.iloc[self.rows["panel_row"].to_numpy()].reset_index(drop=True)
            out = pd.concat([out, feats], axis=1)
        out.to_csv(csv_path, index=False, na_rep="", lineterminator="\n")
        manifest_path = csv_path.with_suffix(".manifest.json")
        manifest_path.write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")
        return manifest_path


def build_horizon_dataset(panel: Panel, h: int, rule: DistressRule = DistressRule()) -> HorizonDataset:
    if h < 0:
        raise ConfigError(f"horizon must be >= 0, got {h}")
    frame = panel.frame
    if len(frame) == 0:
        raise ValueError("panel is empty")
    d = distress_years(panel, rule)
    dy = frame["company_id"].map(d).to_numpy(dtype=float)  # NaN for non-distressed
    years = frame["report_year"].to_numpy()
    distressed = ~np.isnan(dy)
    keep = ~distressed | (years <= dy - h)

    rows = pd.DataFrame(
        {
            "company_id": frame["company_id"].to_numpy()[keep],
            "report_year": years[keep],
            "label": np.zeros(int(keep.sum()), dtype=np.int64),
            "panel_row": np.flatnonzero(keep),
        }
    )
    if len(rows):
        # rows are sorted by (company, year): a distressed company's last kept row is its positive
        ids = rows["company_id"].to_numpy()
        last_of_company = np.r_[ids[1:] != ids[:-1], True]
        rows.loc[distressed[keep] & last_of_company, "label"] = 1
    return HorizonDataset(h, rule, rows)


def summarize_counts(ds: HorizonDataset) -> tuple[int, int, int]:
    pos, neg = ds.class_counts
    return pos + neg, pos, neg
