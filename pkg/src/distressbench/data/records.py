"""Raw company-year data model.

A :class:`Panel` is the columnar container everything downstream works on; the
record dataclasses are the row-level view used at API boundaries and in tests.
Missing statement values are ``None`` on records and ``NaN`` in the frame; the
frame never stores sentinel numbers for absences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Iterator, Mapping

import numpy as np
import pandas as pd

from ..errors import ConfigError, DataError

STATEMENT_FIELDS: tuple[str, ...] = (
    "total_assets",
    "fixed_assets",
    "current_assets",
    "inventories",
    "receivables",
    "cash",
    "quick_assets",
    "equity",
    "share_capital",
    "retained_profit",
    "total_liabilities",
    "current_liabilities",
    "long_term_liabilities",
    "total_operating_revenue",
    "sales",
    "gross_profit",
    "net_profit",
    "ebit",
    "ebitda",
    "depreciation",
    "financial_costs",
    "interest_expense",
    "operating_expenses",
    "total_costs",
    "cash_flow",
)

CATEGORICAL_META: tuple[str, ...] = (
    "country",
    "state_region",
    "legal_form",
    "employees_band",
    "operational_status",
)

NUMERIC_META: tuple[str, ...] = (
    "naics_primary",
    "naics_secondary",
    "naics_2digit",
    "naics_3digit",
    "has_multiple_industries",
    "incorporation_year",
)

META_FIELDS: tuple[str, ...] = ("company_id", *CATEGORICAL_META, *NUMERIC_META, "report_year")

COUNTRY_NAMES: dict[str, str] = {
    "CZ": "Czech Republic",
    "HU": "Hungary",
    "PL": "Poland",
    "SK": "Slovakia",
}

# NAICS 2-digit sector codes -> sector_1 names
_NAICS_SECTORS: dict[int, str] = {
    11: "Agriculture, Forestry, Fishing and Hunting",
    21: "Mining",
    22: "Utilities",
    23: "Construction",
    31: "Manufacturing",
    32: "Manufacturing",
    33: "Manufacturing",
    42: "Wholesale Trade",
    44: "Retail Trade",
    45: "Retail Trade",
    48: "Transportation and Warehousing",
    49: "Transportation and Warehousing",
    51: "Information",
    52: "Finance and Insurance",
    53: "Real Estate",
    54: "Professional Services",
    56: "Administrative Services",
    61: "Educational Services",
    62: "Health Care",
    71: "Arts and Entertainment",
    72: "Accommodation and Food Services",
    81: "Other Services",
    92: "Public Administration",
}


def sector_name(naics_2digit: float | int | None) -> str | None:
    """Map a NAICS 2-digit code to its sector name (``None`` if unknown or missing)."""
    if naics_2digit is None or (isinstance(naics_2digit, float) and math.isnan(naics_2digit)):
        return None
    return _NAICS_SECTORS.get(int(naics_2digit), "Unclassified")


@dataclass(frozen=True)
class RawStatement:
    total_assets: float | None = None
    fixed_assets: float | None = None
    current_assets: float | None = None
    inventories: float | None = None
    receivables: float | None = None
    cash: float | None = None
    quick_assets: float | None = None
    equity: float | None = None
    share_capital: float | None = None
    retained_profit: float | None = None
    total_liabilities: float | None = None
    current_liabilities: float | None = None
    long_term_liabilities: float | None = None
    total_operating_revenue: float | None = None
    sales: float | None = None
    gross_profit: float | None = None
    net_profit: float | None = None
    ebit: float | None = None
    ebitda: float | None = None
    depreciation: float | None = None
    financial_costs: float | None = None
    interest_expense: float | None = None
    operating_expenses: float | None = None
    total_costs: float | None = None
    cash_flow: float | None = None

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not math.isfinite(value):
                raise DataError(f"statement field {f.name} is not finite: {value!r}")


@dataclass(frozen=True)
class CompanyYearRecord:
    company_id: str
    country: str
    report_year: int
    state_region: str | None = None
    legal_form: str | None = None
    employees_band: str | None = None
    operational_status: str | None = None
    naics_primary: int | None = None
    naics_secondary: int | None = None
    naics_2digit: int | None = None
    naics_3digit: int | None = None
    has_multiple_industries: int | None = None
    incorporation_year: int | None = None
    statement: RawStatement = field(default_factory=RawStatement)

    def __post_init__(self) -> None:
        if self.incorporation_year is not None and self.incorporation_year > self.report_year:
            raise DataError(
                f"{self.company_id}/{self.report_year}: incorporation year "
                f"{self.incorporation_year} is after the report year"
            )

    @property
    def sector(self) -> str | None:
        return sector_name(self.naics_2digit)


class MacroTable:
    """GDP per (country, year)."""

    def __init__(self, gdp: Mapping[tuple[str, int], float]):
        clean: dict[tuple[str, int], float] = {}
        for (country, year), value in gdp.items():
            value = float(value)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"GDP for ({country}, {year}) must be positive, got {value!r}")
            clean[(str(country), int(year))] = value
        self._gdp = clean

    def lookup(self, country: str, year: int) -> float | None:
        return self._gdp.get((country, int(year)))

    def items(self):
        return sorted(self._gdp.items())

    def __len__(self) -> int:
        return len(self._gdp)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MacroTable) and self._gdp == other._gdp

    def lookup_many(self, country: np.ndarray, year: np.ndarray) -> np.ndarray:
        out = np.full(len(country), np.nan)
        for i, key in enumerate(zip(country, year)):
            value = self._gdp.get((key[0], int(key[1])))
            if value is not None:
                out[i] = value
        return out


def _empty_frame() -> pd.DataFrame:
    data: dict[str, pd.Series] = {"company_id": pd.Series([], dtype=object)}
    for name in CATEGORICAL_META:
        data[name] = pd.Series([], dtype=object)
    for name in NUMERIC_META:
        data[name] = pd.Series([], dtype=float)
    data["report_year"] = pd.Series([], dtype=np.int64)
    for name in STATEMENT_FIELDS:
        data[name] = pd.Series([], dtype=float)
    return pd.DataFrame(data)


class Panel:
    """Company-year panel with per-company histories sorted by report year.

    Construction validates the invariants (unique ``(company_id, report_year)``,
    finite statement values, incorporation not after reporting) and sorts rows.
    Treat instances as immutable: every transformation returns a new panel.
    """

    def __init__(self, frame: pd.DataFrame, macro: MacroTable | None = None):
        missing = [c for c in META_FIELDS + STATEMENT_FIELDS if c not in frame.columns]
        if missing:
            raise DataError(f"panel frame lacks columns: {missing}")
        frame = frame.loc[:, list(META_FIELDS + STATEMENT_FIELDS)].copy()
        frame["company_id"] = frame["company_id"].astype(str)
        frame["report_year"] = frame["report_year"].astype(np.int64)
        for name in NUMERIC_META + STATEMENT_FIELDS:
            frame[name] = frame[name].astype(float)
        for name in CATEGORICAL_META:
            frame[name] = frame[name].astype(object).where(frame[name].notna(), None)

        dup = frame.duplicated(["company_id", "report_year"], keep=False)
        if dup.any():
            pairs = sorted(set(zip(frame.loc[dup, "company_id"], frame.loc[dup, "report_year"])))
            raise DataError(f"duplicate (company_id, report_year) pairs: {pairs}")
        unknown = sorted(set(frame["country"].dropna()) - set(COUNTRY_NAMES))
        if unknown:
            raise DataError(f"unknown country codes: {unknown}")
        stmt = frame[list(STATEMENT_FIELDS)].to_numpy()
        if np.isinf(stmt).any():
            rows, cols = np.nonzero(np.isinf(stmt))
            raise DataError(
                f"non-finite statement value at row {rows[0]} field {STATEMENT_FIELDS[cols[0]]}"
            )
        inc = frame["incorporation_year"].to_numpy()
        bad = inc > frame["report_year"].to_numpy()
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DataError(
                f"incorporation year after report year for "
                f"{frame['company_id'].iat[i]}/{frame['report_year'].iat[i]}"
            )
        frame = frame.sort_values(["company_id", "report_year"], kind="mergesort")
        self._frame = frame.reset_index(drop=True)
        self.macro = macro

    @classmethod
    def from_records(cls, records: Iterable[CompanyYearRecord], macro: MacroTable | None = None) -> Panel:
        rows = []
        for r in records:
            row = {name: getattr(r, name) for name in META_FIELDS}
            row.update({name: getattr(r.statement, name) for name in STATEMENT_FIELDS})
            rows.append(row)
        if not rows:
            return cls(_empty_frame(), macro)
        frame = pd.DataFrame(rows)
        for name in NUMERIC_META + STATEMENT_FIELDS:
            frame[name] = pd.to_numeric(frame[name], errors="coerce").astype(float)
        return cls(frame, macro)

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    def __len__(self) -> int:
        return len(self._frame)

    @property
    def company_ids(self) -> list[str]:
        return list(pd.unique(self._frame["company_id"]))

    def record_at(self, i: int) -> CompanyYearRecord:
        row = self._frame.iloc[i]
        return _row_to_record(row)

    def records(self) -> Iterator[CompanyYearRecord]:
        for _, row in self._frame.iterrows():
            yield _row_to_record(row)

    def history(self, company_id: str) -> list[CompanyYearRecord]:
        sub = self._frame[self._frame["company_id"] == company_id]
        return [_row_to_record(row) for _, row in sub.iterrows()]

    def histories(self) -> Iterator[tuple[str, list[CompanyYearRecord]]]:
        for cid, sub in self._frame.groupby("company_id", sort=True):
            yield cid, [_row_to_record(row) for _, row in sub.iterrows()]

    def sectors(self) -> np.ndarray:
        codes = self._frame["naics_2digit"].to_numpy()
        return np.array([sector_name(c) for c in codes], dtype=object)

    def year_span(self) -> tuple[int, int] | None:
        if len(self._frame) == 0:
            return None
        years = self._frame["report_year"]
        return int(years.min()), int(years.max())


def _opt_int(value) -> int | None:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return int(value)


def _opt_float(value) -> float | None:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(value)


def _row_to_record(row: pd.Series) -> CompanyYearRecord:
    stmt = RawStatement(**{name: _opt_float(row[name]) for name in STATEMENT_FIELDS})
    return CompanyYearRecord(
        company_id=str(row["company_id"]),
        country=row["country"],
        report_year=int(row["report_year"]),
        state_region=row["state_region"],
        legal_form=row["legal_form"],
        employees_band=row["employees_band"],
        operational_status=row["operational_status"],
        naics_primary=_opt_int(row["naics_primary"]),
        naics_secondary=_opt_int(row["naics_secondary"]),
        naics_2digit=_opt_int(row["naics_2digit"]),
        naics_3digit=_opt_int(row["naics_3digit"]),
        has_multiple_industries=_opt_int(row["has_multiple_industries"]),
        incorporation_year=_opt_int(row["incorporation_year"]),
        statement=stmt,
    )


def attach_macro(panel: Panel, macro: MacroTable) -> Panel:
    """Return a panel sharing ``panel``'s rows with ``macro`` attached for GDP lookups.

    Validation of the table (GDP > 0) happens when the :class:`MacroTable` is
    built; uncovered (country, year) pairs simply yield missing GDP features.
    """
    if not isinstance(macro, MacroTable):
        macro = MacroTable(macro)
    out = Panel.__new__(Panel)
    out._frame = panel.frame
    out.macro = macro
    return out
