"""Feature computation over panels (vectorized) and single records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from ..data.records import CATEGORICAL_META, NUMERIC_META, STATEMENT_FIELDS, CompanyYearRecord, MacroTable, Panel
from .catalog import DERIVED, FeatureDef, default_catalog
from .formula import compile_formula, strip_rel


@dataclass(frozen=True)
class FeatureVector:
    """One row of the catalog. Categorical entries are strings, the rest floats; ``None`` is missing."""

    ids: tuple[str, ...]
    values: tuple[float | str | None, ...]

    @property
    def mask(self) -> np.ndarray:
        """True where the value is missing."""
        return np.array([v is None or (isinstance(v, float) and np.isnan(v)) for v in self.values])

    def __len__(self) -> int:
        return len(self.values)

    def get(self, feature_id: str):
        return self.values[self.ids.index(feature_id)]


@dataclass(frozen=True)
class SectorYearStats:
    """Mean of each sector-relative base ratio per (sector, year), over non-missing values.

    ``table`` has columns feature, sector, year, mean, count.
    """

    table: pd.DataFrame

    def lookup(self, feature_id: str, sectors: np.ndarray, years: np.ndarray) -> np.ndarray:
        sub = self.table[self.table["feature"] == feature_id]
        if len(sub) == 0:
            return np.full(len(sectors), np.nan)
        means = pd.Series(sub["mean"].to_numpy(), index=pd.MultiIndex.from_arrays([sub["sector"], sub["year"]]))
        keys = pd.MultiIndex.from_arrays([np.asarray(sectors, dtype=object), np.asarray(years, dtype=np.int64)])
        return means.reindex(keys).to_numpy(dtype=float)

    def mean(self, feature_id: str, sector: str, year: int) -> float | None:
        hit = self.table[
            (self.table["feature"] == feature_id) & (self.table["sector"] == sector) & (self.table["year"] == year)
        ]
        return None if len(hit) == 0 else float(hit["mean"].iat[0])

    def count(self, feature_id: str, sector: str, year: int) -> int:
        hit = self.table[
            (self.table["feature"] == feature_id) & (self.table["sector"] == sector) & (self.table["year"] == year)
        ]
        return 0 if len(hit) == 0 else int(hit["count"].iat[0])


class _Context:
    def __init__(self, columns, previous, stats: SectorYearStats | None):
        self._columns = columns
        self._previous = previous
        self._stats = stats

    def column(self, name: str) -> np.ndarray:
        return self._columns[name]

    def previous(self, name: str) -> np.ndarray:
        return self._previous[name]

    def sector_mean(self, key: str) -> np.ndarray:
        if self._stats is None:
            return np.full(len(self._columns["report_year"]), np.nan)
        return self._stats.lookup(key, self._columns["sector_1"], self._columns["report_year"])


def _columns_from_frame(frame: pd.DataFrame, macro: MacroTable | None, sectors: np.ndarray) -> dict:
    cols = {name: frame[name].to_numpy(dtype=float) for name in STATEMENT_FIELDS + NUMERIC_META}
    cols["report_year"] = frame["report_year"].to_numpy(dtype=np.int64)
    for name in CATEGORICAL_META:
        cols[name] = frame[name].to_numpy(dtype=object)
    cols["sector_1"] = sectors
    if macro is None:
        cols["gdp"] = np.full(len(frame), np.nan)
    else:
        cols["gdp"] = macro.lookup_many(cols["country"], cols["report_year"])
    return cols


def _previous_year_columns(frame: pd.DataFrame) -> dict[str, np.ndarray]:
    ids = frame["company_id"].to_numpy()
    years = frame["report_year"].to_numpy()
    has_prev = np.zeros(len(frame), dtype=bool)
    if len(frame) > 1:
        has_prev[1:] = (ids[1:] == ids[:-1]) & (years[1:] == years[:-1] + 1)
    prev = {}
    for name in STATEMENT_FIELDS:
        values = frame[name].to_numpy(dtype=float)
        shifted = np.full(len(values), np.nan)
        shifted[1:] = values[:-1]
        shifted[~has_prev] = np.nan
        prev[name] = shifted
    return prev


def _evaluate(feat: FeatureDef, ctx: _Context, n: int) -> np.ndarray:
    if feat.categorical:
        return ctx.column(feat.formula)
    fn = compile_formula(feat.formula, DERIVED, key=feat.id)
    out = np.asarray(fn(ctx), dtype=float)
    return np.broadcast_to(out, (n,)).copy() if out.shape != (n,) else out


def compute_sector_year_stats(panel: Panel, catalog: Sequence[FeatureDef] | None = None) -> SectorYearStats:
    """Sector-year means of every sector-relative base ratio in ``catalog``."""
    catalog = default_catalog() if catalog is None else catalog
    frame = panel.frame
    sectors = panel.sectors()
    ctx = _Context(_columns_from_frame(frame, panel.macro, sectors), _previous_year_columns(frame), None)
    parts = []
    years = frame["report_year"].to_numpy()
    for feat in catalog:
        if feat.kind != "sector_relative":
            continue
        base = compile_formula(strip_rel(feat.formula), DERIVED)
        values = np.broadcast_to(np.asarray(base(ctx), dtype=float), (len(frame),))
        ok = np.isfinite(values) & np.array([s is not None for s in sectors], dtype=bool)
        if not ok.any():
            continue
        grouped = (
            pd.DataFrame({"sector": sectors[ok], "year": years[ok], "value": values[ok]})
            .groupby(["sector", "year"], sort=True)["value"]
            .agg(["mean", "count"])
            .reset_index()
        )
        grouped.insert(0, "feature", feat.id)
        parts.append(grouped)
    if parts:
        table = pd.concat(parts, ignore_index=True)
    else:
        table = pd.DataFrame({"feature": [], "sector": [], "year": [], "mean": [], "count": []})
    table["year"] = table["year"].astype(np.int64)
    return SectorYearStats(table)


def compute_feature_table(
    panel: Panel,
    stats: SectorYearStats | None = None,
    catalog: Sequence[FeatureDef] | None = None,
    macro: MacroTable | None = None,
) -> pd.DataFrame:
    """Feature matrix for every panel row, columns in catalog order.

    Categorical columns hold strings (object dtype), the rest floats with NaN
    for missing. Row ``i`` corresponds to ``panel.frame`` row ``i``.
    """
    catalog = default_catalog() if catalog is None else catalog
    if stats is None:
        stats = compute_sector_year_stats(panel, catalog)
    frame = panel.frame
    macro = macro if macro is not None else panel.macro
    ctx = _Context(_columns_from_frame(frame, macro, panel.sectors()), _previous_year_columns(frame), stats)
    n = len(frame)
    return pd.DataFrame({feat.id: _evaluate(feat, ctx, n) for feat in catalog})


def compute_features(
    record: CompanyYearRecord,
    prev: CompanyYearRecord | None,
    stats: SectorYearStats | None,
    macro: MacroTable | None,
    catalog: Sequence[FeatureDef] | None = None,
) -> FeatureVector:
    """Feature vector for a single record; ``prev`` feeds the growth block.

    ``prev`` is used only when it is the same company's report for the
    immediately preceding year.
    """
    catalog = default_catalog() if catalog is None else catalog
    panel = Panel.from_records([record])
    frame = panel.frame
    cols = _columns_from_frame(frame, macro, panel.sectors())
    previous = {name: np.full(1, np.nan) for name in STATEMENT_FIELDS}
    if prev is not None and prev.company_id == record.company_id and prev.report_year == record.report_year - 1:
        for name in STATEMENT_FIELDS:
            value = getattr(prev.statement, name)
            previous[name] = np.array([np.nan if value is None else float(value)])
    ctx = _Context(cols, previous, stats)
    values = []
    for feat in catalog:
        v = _evaluate(feat, ctx, 1)[0]
        if feat.categorical:
            values.append(v)
        else:
            values.append(None if np.isnan(v) else float(v))
    return FeatureVector(tuple(f.id for f in catalog), tuple(values))


def vectors_to_frame(vectors: Sequence[FeatureVector]) -> pd.DataFrame:
    if not vectors:
        raise ValueError("no feature vectors")
    ids = vectors[0].ids
    data = {fid: [v.values[j] for v in vectors] for j, fid in enumerate(ids)}
    frame = pd.DataFrame(data)
    for fid in ids:
        col = frame[fid]
        if not col.map(lambda x: isinstance(x, str)).any():
            frame[fid] = pd.to_numeric(col, errors="coerce").astype(float)
    return frame


def frame_to_vectors(table: pd.DataFrame) -> list[FeatureVector]:
    ids = tuple(table.columns)
    out = []
    for row in table.itertuples(index=False):
        vals = tuple(None if (v is None or (isinstance(v, float) and np.isnan(v))) else v for v in row)
        out.append(FeatureVector(ids, vals))
    return out
