"""CSV ingestion/serialization for panels and macro tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import DataError, SchemaError
from .records import CATEGORICAL_META, META_FIELDS, NUMERIC_META, STATEMENT_FIELDS, MacroTable, Panel

MANDATORY_COLUMNS = ("company_id", "report_year", "country")
_MISSING_TOKENS = {"", "n/a"}


@dataclass
class CsvSchema:
    """Maps panel field names to CSV column names; ``None`` marks a field as absent.

    Fields not listed in ``columns`` default to a column with the same name, if
    the file has one.
    """

    columns: dict[str, str | None] = field(default_factory=dict)
    delimiter: str = ","

    def column_for(self, name: str) -> str | None:
        return self.columns.get(name, name)


def _is_missing(values: pd.Series) -> np.ndarray:
    return values.str.strip().str.lower().isin(_MISSING_TOKENS).to_numpy()


def _to_float(values: pd.Series) -> np.ndarray:
    out = pd.to_numeric(values.str.strip(), errors="coerce").astype(float).to_numpy()
    out[~np.isfinite(out)] = np.nan
    return out


def ingest_csv(path: str | Path, schema: CsvSchema | None = None) -> Panel:
    """Read a panel from CSV.

    Empty cells and ``n/a`` (any case) are missing; unparseable numeric cells
    also become missing. Raises :class:`SchemaError` when a mandatory column
    is not mapped or not present, :class:`DataError` on duplicate
    ``(company_id, report_year)`` pairs.
    """
    schema = schema or CsvSchema()
    raw = pd.read_csv(
        path,
        sep=schema.delimiter,
        dtype=str,
        keep_default_na=False,
        na_filter=False,
    )
    for name in MANDATORY_COLUMNS:
        col = schema.column_for(name)
        if col is None or col not in raw.columns:
            raise SchemaError(f"mandatory column missing: {col or name!r}")

    n = len(raw)
    data: dict[str, object] = {}
    for name in META_FIELDS + STATEMENT_FIELDS:
        col = schema.column_for(name)
        present = col is not None and col in raw.columns
        if name in ("company_id", *CATEGORICAL_META):
            if present:
                values = raw[col]
                data[name] = values.str.strip().where(~_is_missing(values), None).astype(object)
            else:
                data[name] = pd.Series([None] * n, dtype=object)
        elif name == "report_year":
            years = _to_float(raw[col])
            if np.isnan(years).any():
                bad = int(np.flatnonzero(np.isnan(years))[0])
                raise DataError(f"unparseable report_year at data row {bad + 1}: {raw[col].iat[bad]!r}")
            data[name] = years.astype(np.int64)
        else:
            data[name] = _to_float(raw[col]) if present else np.full(n, np.nan)
    frame = pd.DataFrame(data)
    if frame["company_id"].isna().any() or frame["country"].isna().any():
        raise DataError("company_id and country must be present on every row")
    return Panel(frame)


def panel_to_csv_text(panel: Panel, delimiter: str = ",") -> str:
    buf = io.StringIO()
    frame = panel.frame.loc[:, list(META_FIELDS + STATEMENT_FIELDS)]
    frame.to_csv(buf, index=False, sep=delimiter, na_rep="", lineterminator="\n")
    return buf.getvalue()


def write_panel_csv(panel: Panel, path: str | Path, delimiter: str = ",") -> None:
    Path(path).write_text(panel_to_csv_text(panel, delimiter), encoding="utf-8")


def read_macro_csv(path: str | Path) -> MacroTable:
    """Read a ``country,year,gdp`` table."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"country", "year", "gdp"} - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"macro table missing columns: {sorted(missing)}")
        return MacroTable({(row["country"].strip(), int(row["year"])): float(row["gdp"]) for row in reader})


def write_macro_csv(macro: MacroTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "year", "gdp"])
        for (country, year), gdp in macro.items():
            writer.writerow([country, year, repr(gdp)])
