"""Declarative feature catalog (X1..X131).

Every feature is a row of data: id, label, kind and a formula in the
:mod:`~distressbench.features.formula` language. Categorical metadata columns
carry the raw field name as formula and are passed through untouched until
label encoding.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..data.records import META_FIELDS, STATEMENT_FIELDS
from .formula import referenced_names

KINDS = ("metadata", "ratio", "flag", "growth", "log_macro", "sector_relative", "absolute")

# Helper quantities referenced by name inside formulas.
DERIVED: dict[str, str] = {
    "working_capital": "current_assets - current_liabilities",
    "constant_capital": "equity + long_term_liabilities",
    "revenue": "total_operating_revenue",
    "operating_profit": "ebit",
    "total_debt": "total_liabilities",
    "company_age": "report_year - incorporation_year",
    "receivable_days": "receivables * 365 / total_operating_revenue",
    "inventory_days": "inventories * 365 / total_operating_revenue",
    "payable_days": "current_liabilities * 365 / total_operating_revenue",
    "operating_cycle": "(inventories + receivables) * 365 / total_operating_revenue",
    "cash_conversion_cycle": "inventory_days + receivable_days - payable_days",
}

INPUT_NAMES = frozenset(STATEMENT_FIELDS) | frozenset(META_FIELDS) | {"sector_1", "gdp"}


@dataclass(frozen=True)
class FeatureDef:
    id: str
    name: str
    kind: str
    formula: str
    categorical: bool = False


def _f(id_, name, kind, formula, categorical=False):
    return FeatureDef(id_, name, kind, formula, categorical)


_CATALOG: tuple[FeatureDef, ...] = (
    # company identifiers and metadata
    _f("X1", "Country", "metadata", "country", True),
    _f("X2", "Has multiple industries flag", "metadata", "has_multiple_industries"),
    _f("X3", "Incorporation date 1 (0-2y, 3-4y, 5-24y, >24y)", "metadata", "band(company_age, 3, 5, 25)"),
    _f("X4", "Incorporation date 2 (0-1y, 2y, 3-5y, 6-9y, 10-19y, >19y)", "metadata",
       "band(company_age, 2, 3, 6, 10, 20)"),
    _f("X5", "Legal form", "metadata", "legal_form", True),
    _f("X6", "NAICS 2-digit classification", "metadata", "naics_2digit"),
    _f("X7", "NAICS 3-digit classification", "metadata", "naics_3digit"),
    _f("X8", "Number of employees", "metadata", "employees_band", True),
    _f("X9", "Operational status", "metadata", "operational_status", True),
    _f("X10", "Primary NAICS (encoded)", "metadata", "naics_primary"),
    _f("X11", "Secondary NAICS (encoded)", "metadata", "naics_secondary"),
    _f("X12", "Sector 1", "metadata", "sector_1", True),
    _f("X13", "State/region", "metadata", "state_region", True),
    _f("X14", "Report year", "metadata", "report_year"),
    # liquidity and profitability
    _f("X15", "Cash / sales", "ratio", "cash / sales"),
    _f("X16", "Cash / total assets", "ratio", "cash / total_assets"),
    _f("X17", "Cash / total operating revenue", "ratio", "cash / total_operating_revenue"),
    _f("X18", "(Current assets - inventories - receivables) / short term liabilities", "ratio",
       "(current_assets - inventories - receivables) / current_liabilities"),
    _f("X19", "(Current assets - inventories) / short term liabilities", "ratio",
       "(current_assets - inventories) / current_liabilities"),
    _f("X20", "Current assets / sales", "ratio", "current_assets / sales"),
    _f("X21", "Current assets / short term liabilities", "ratio", "current_assets / current_liabilities"),
    _f("X22", "EBIT / equity", "ratio", "ebit / equity"),
    _f("X23", "EBIT / financial costs", "ratio", "ebit / financial_costs"),
    _f("X24", "EBIT / total assets", "ratio", "ebit / total_assets"),
    _f("X25", "EBIT / total costs", "ratio", "ebit / total_costs"),
    _f("X26", "EBIT / total liabilities", "ratio", "ebit / total_liabilities"),
    _f("X27", "EBIT / total operating revenue", "ratio", "ebit / total_operating_revenue"),
    _f("X28", "EBITDA / fixed assets", "ratio", "ebitda / fixed_assets"),
    _f("X29", "EBITDA / total assets", "ratio", "ebitda / total_assets"),
    _f("X30", "EBITDA / total operating revenue", "ratio", "ebitda / total_operating_revenue"),
    _f("X31", "(Gross profit + depreciation) / total liabilities", "ratio",
       "(gross_profit + depreciation) / total_liabilities"),
    _f("X32", "Gross profit / short term liabilities", "ratio", "gross_profit / current_liabilities"),
    _f("X33", "Gross profit / total assets", "ratio", "gross_profit / total_assets"),
    _f("X34", "Gross profit / total operating revenue", "ratio", "gross_profit / total_operating_revenue"),
    _f("X35", "Interest expense / revenue", "ratio", "interest_expense / revenue"),
    _f("X36", "Inventories / working capital", "ratio", "inventories / working_capital"),
    _f("X37", "(Net profit + depreciation) / current liabilities", "ratio",
       "(net_profit + depreciation) / current_liabilities"),
    _f("X38", "(Net profit + depreciation) / total liabilities", "ratio",
       "(net_profit + depreciation) / total_liabilities"),
    _f("X39", "Net profit / equity", "ratio", "net_profit / equity"),
    _f("X40", "Net profit / fixed assets", "ratio", "net_profit / fixed_assets"),
    _f("X41", "Net profit / inventories", "ratio", "net_profit / inventories"),
    _f("X42", "Net profit / total assets", "ratio", "net_profit / total_assets"),
    _f("X43", "Net profit / total operating revenue", "ratio", "net_profit / total_operating_revenue"),
    _f("X44", "Net profit / current assets", "ratio", "net_profit / current_assets"),
    _f("X45", "Operational expenses / short term liabilities", "ratio", "operating_expenses / current_liabilities"),
    _f("X46", "Operational expenses / total liabilities", "ratio", "operating_expenses / total_liabilities"),
    _f("X47", "Quick assets / sales", "ratio", "(current_assets - inventories) / sales"),
    _f("X48", "Retained profit / short term liabilities", "ratio", "retained_profit / current_liabilities"),
    _f("X49", "Retained profit / total assets", "ratio", "retained_profit / total_assets"),
    _f("X50", "Working capital (absolute value)", "absolute", "working_capital"),
    _f("X51", "Working capital / equity", "ratio", "working_capital / equity"),
    _f("X52", "Working capital / fixed assets", "ratio", "working_capital / fixed_assets"),
    _f("X53", "Working capital / sales", "ratio", "working_capital / sales"),
    _f("X54", "Working capital / total assets", "ratio", "working_capital / total_assets"),
    _f("X55", "Working capital / total liabilities", "ratio", "working_capital / total_liabilities"),
    _f("X56", "Working capital / total operating revenue", "ratio", "working_capital / total_operating_revenue"),
    _f("X57", "Cash flow / sales", "ratio", "cash_flow / sales"),
    _f("X58", "Cash flow / total debt", "ratio", "cash_flow / total_debt"),
    _f("X59", "Loss flag (net profit < 0)", "flag", "net_profit < 0"),
    # turnover and cycle
    _f("X60", "Cash conversion cycle (days)", "ratio", "cash_conversion_cycle"),
    _f("X61", "Inventories / total operating revenue", "ratio", "inventories / total_operating_revenue"),
    _f("X62", "Operating cycle (days)", "ratio", "operating_cycle"),
    _f("X63", "Operating expenses / sales", "ratio", "operating_expenses / sales"),
    _f("X64", "Receivables turnover days", "ratio", "receivable_days"),
    _f("X65", "Revenue / current assets", "ratio", "revenue / current_assets"),
    _f("X66", "Revenue / long term liabilities", "ratio", "revenue / long_term_liabilities"),
    _f("X67", "Revenue / total liabilities", "ratio", "revenue / total_liabilities"),
    _f("X68", "Short term liabilities turnover days", "ratio", "payable_days"),
    _f("X69", "Total operating revenue / fixed assets", "ratio", "total_operating_revenue / fixed_assets"),
    _f("X70", "Total operating revenue / inventories", "ratio", "total_operating_revenue / inventories"),
    _f("X71", "Total operating revenue / receivables", "ratio", "total_operating_revenue / receivables"),
    _f("X72", "Total operating revenue / short term liabilities", "ratio",
       "total_operating_revenue / current_liabilities"),
    _f("X73", "Total operating revenue / total assets", "ratio", "total_operating_revenue / total_assets"),
    # solvency and capital structure
    _f("X74", "Constant capital / fixed assets", "ratio", "constant_capital / fixed_assets"),
    _f("X75", "Constant capital / total assets", "ratio", "constant_capital / total_assets"),
    _f("X76", "Current assets / total liabilities", "ratio", "current_assets / total_liabilities"),
    _f("X77", "Current assets / total operating revenue", "ratio", "current_assets / total_operating_revenue"),
    _f("X78", "Current liabilities / total liabilities", "ratio", "current_liabilities / total_liabilities"),
    _f("X79", "Current liabilities / current assets", "ratio", "current_liabilities / current_assets"),
    _f("X80", "Current liabilities / equity", "ratio", "current_liabilities / equity"),
    _f("X81", "Short term liabilities / total assets", "ratio", "current_liabilities / total_assets"),
    _f("X82", "(Equity - share capital) / fixed assets", "ratio", "(equity - share_capital) / fixed_assets"),
    _f("X83", "Equity / fixed assets", "ratio", "equity / fixed_assets"),
    _f("X84", "Equity / long term liabilities", "ratio", "equity / long_term_liabilities"),
    _f("X85", "Equity / sales", "ratio", "equity / sales"),
    _f("X86", "Equity / total assets", "ratio", "equity / total_assets"),
    _f("X87", "Equity / total liabilities", "ratio", "equity / total_liabilities"),
    _f("X88", "Equity ratio classification (<0, 0-0.2, 0.2-0.5, >=0.5)", "ratio",
       "band(equity / total_assets, 0, 0.2, 0.5)"),
    _f("X89", "Fixed assets / long term liabilities", "ratio", "fixed_assets / long_term_liabilities"),
    _f("X90", "Fixed assets / total assets", "ratio", "fixed_assets / total_assets"),
    _f("X91", "(Inventories + receivables) / equity", "ratio", "(inventories + receivables) / equity"),
    _f("X92", "Inventory / current liabilities", "ratio", "inventories / current_liabilities"),
    _f("X93", "Long term liabilities / current assets", "ratio", "long_term_liabilities / current_assets"),
    _f("X94", "Long term liabilities / equity", "ratio", "long_term_liabilities / equity"),
    _f("X95", "(Total liabilities - cash) / EBITDA", "ratio", "(total_liabilities - cash) / ebitda"),
    _f("X96", "(Total liabilities - cash) / total operating revenue", "ratio",
       "(total_liabilities - cash) / total_operating_revenue"),
    _f("X97", "Total liabilities / total assets", "ratio", "total_liabilities / total_assets"),
    _f("X98", "Insolvency flag (total liabilities > total assets)", "flag", "total_liabilities > total_assets"),
    # year-over-year growth
    _f("X99", "Current assets growth (YoY)", "growth", "growth(current_assets)"),
    _f("X100", "Inventories growth (YoY)", "growth", "growth(inventories)"),
    _f("X101", "Net profit growth (YoY)", "growth", "growth(net_profit)"),
    _f("X102", "Operating profit growth (YoY)", "growth", "growth(operating_profit)"),
    _f("X103", "Operating revenue growth (YoY)", "growth", "growth(total_operating_revenue)"),
    _f("X104", "Receivables growth (YoY)", "growth", "growth(receivables)"),
    _f("X105", "Short term liabilities growth (YoY)", "growth", "growth(current_liabilities)"),
    _f("X106", "Total assets growth (YoY)", "growth", "growth(total_assets)"),
    # size and macro
    _f("X107", "Logarithm of current assets", "absolute", "log(current_assets)"),
    _f("X108", "Logarithm of (net profit / GDP)", "log_macro", "log(net_profit / gdp)"),
    _f("X109", "Logarithm of (operating profit / GDP)", "log_macro", "log(operating_profit / gdp)"),
    _f("X110", "Logarithm of (revenue / GDP)", "log_macro", "log(revenue / gdp)"),
    _f("X111", "Logarithm of total liabilities", "absolute", "log(total_liabilities)"),
    _f("X112", "Logarithm of total assets", "absolute", "log(total_assets)"),
    _f("X113", "Logarithm of (total assets / GDP)", "log_macro", "log(total_assets / gdp)"),
    _f("X114", "Logarithm of total operating revenue", "absolute", "log(total_operating_revenue)"),
    # sector-relative: ratio minus its (sector, year) mean
    _f("X115", "Cash conversion cycle (sector-relative)", "sector_relative", "rel(cash_conversion_cycle)"),
    _f("X116", "(Current liabilities x 365) / revenue (sector-relative)", "sector_relative", "rel(payable_days)"),
    _f("X117", "Current assets / current liabilities (sector-relative)", "sector_relative",
       "rel(current_assets / current_liabilities)"),
    _f("X118", "EBITDA margin (sector-relative)", "sector_relative", "rel(ebitda / revenue)"),
    _f("X119", "(Inventories x 365) / revenue (sector-relative)", "sector_relative", "rel(inventory_days)"),
    _f("X120", "Net profit / absolute equity (sector-relative)", "sector_relative", "rel(net_profit / abs(equity))"),
    _f("X121", "Net profit / assets (sector-relative)", "sector_relative", "rel(net_profit / total_assets)"),
    _f("X122", "Net profit / current assets (sector-relative)", "sector_relative", "rel(net_profit / current_assets)"),
    _f("X123", "Net profit / fixed assets (sector-relative)", "sector_relative", "rel(net_profit / fixed_assets)"),
    _f("X124", "Net profit / sales (sector-relative)", "sector_relative", "rel(net_profit / sales)"),
    _f("X125", "Operating cycle (sector-relative)", "sector_relative", "rel(operating_cycle)"),
    _f("X126", "(Receivables x 365) / revenue (sector-relative)", "sector_relative", "rel(receivable_days)"),
    _f("X127", "Revenue / assets (sector-relative)", "sector_relative", "rel(revenue / total_assets)"),
    _f("X128", "Revenue / fixed assets (sector-relative)", "sector_relative", "rel(revenue / fixed_assets)"),
    _f("X129", "Short-term financial assets / current liabilities (sector-relative)", "sector_relative",
       "rel(cash / current_liabilities)"),
    _f("X130", "Short-term receivables investments / current liabilities (sector-relative)", "sector_relative",
       "rel(receivables / current_liabilities)"),
    _f("X131", "Working capital / assets (sector-relative)", "sector_relative", "rel(working_capital / total_assets)"),
)


def validate_catalog(catalog: tuple[FeatureDef, ...] | list[FeatureDef]) -> None:
    seen: set[str] = set()
    for feat in catalog:
        if feat.id in seen:
            raise ValueError(f"duplicate feature id {feat.id}")
        seen.add(feat.id)
        if feat.kind not in KINDS:
            raise ValueError(f"{feat.id}: unknown kind {feat.kind!r}")
        pending, names = [feat.formula], set()
        while pending:
            for name in referenced_names(pending.pop()):
                if name in DERIVED:
                    pending.append(DERIVED[name])
                else:
                    names.add(name)
        unknown = names - INPUT_NAMES
        if unknown:
            raise ValueError(f"{feat.id}: formula references undeclared inputs {sorted(unknown)}")


def default_catalog(drop: tuple[str, ...] | list[str] = ()) -> tuple[FeatureDef, ...]:
    """The full X1..X131 catalog, optionally without some ids (e.g. ``("X9",)``)."""
    catalog = tuple(f for f in _CATALOG if f.id not in set(drop))
    validate_catalog(catalog)
    return catalog


def write_data_dictionary(catalog, path: str | Path) -> None:
    """Serialize the catalog as JSON (``.json``) or CSV (anything else)."""
    path = Path(path)
    rows = [asdict(f) for f in catalog]
    if path.suffix == ".json":
        path.write_text(json.dumps({"derived": DERIVED, "features": rows}, indent=2) + "\n")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "name", "kind", "formula", "categorical"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
