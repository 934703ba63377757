"""Text serialization of one company-year for the prompt."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from ..data.records import COUNTRY_NAMES
from ..features.preprocess import PreprocessStats, apply_preprocessor

# (prompt key, feature id). Group membership is plain data; swap it freely.
COMPANY_INFO: tuple[tuple[str, str], ...] = (
    ("country", "X1"),
    ("state", "X13"),
    ("number_of_employees", "X8"),
    ("legal_form", "X5"),
    ("primary_naics_encoded", "X10"),
    ("naics_2digit", "X6"),
    ("naics_3digit", "X7"),
    ("has_multiple_industries", "X2"),
    ("secondary_naics_encoded", "X11"),
    ("sector_1", "X12"),
    ("operational_status", "X9"),
    ("year", "X14"),
)

FEATURE_GROUPS: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = (
    (
        "Liquidity",
        (
            ("Working_capital", "X50"),
            ("Cash/total_assets", "X16"),
            ("Inventories/working_capital", "X36"),
            ("Current_ratio", "X21"),
            ("Quick_ratio", "X19"),
            ("Cash_ratio", "X18"),
        ),
    ),
    (
        "Profitability",
        (
            ("EBIT/total_assets", "X24"),
            ("EBITDA/total_assets", "X29"),
            ("EBITDA_margin", "X30"),
            ("Net_profit/total_assets", "X42"),
            ("Net_profit_margin", "X43"),
            ("Return_on_equity", "X39"),
        ),
    ),
    (
        "Leverage",
        (
            ("Debt/total_assets", "X97"),
            ("Equity/total_assets", "X86"),
            ("EBIT/total_liabilities", "X26"),
            ("Net_debt/EBITDA", "X95"),
            ("Interest_coverage", "X23"),
        ),
    ),
    (
        "Efficiency",
        (
            ("Asset_turnover", "X73"),
            ("Receivable_days", "X64"),
            ("Payable_days", "X68"),
            ("Operating_cycle", "X62"),
            ("Cash_conversion_cycle", "X60"),
        ),
    ),
    (
        "Growth",
        (
            ("Revenue_growth", "X103"),
            ("Total_assets_growth", "X106"),
            ("Net_profit_growth", "X101"),
            ("Current_liabilities_growth", "X105"),
        ),
    ),
    (
        "Structure",
        (
            ("Fixed_assets/total_assets", "X90"),
            ("Current_liabilities/total_liabilities", "X78"),
            ("Log_total_assets", "X112"),
            ("Incorporation_date_1", "X3"),
            ("Incorporation_date_2", "X4"),
        ),
    ),
    ("Risk Flags", (("Insolvency_flag", "X98"), ("Loss_flag", "X59"))),
)

MISSING_TEXT = "unknown"


def prompt_feature_frame(table: pd.DataFrame, stats: PreprocessStats) -> pd.DataFrame:
    """Numeric columns median-imputed and unscaled; categoricals kept as text.

    Missing categoricals read ``unknown``, so no field is ever blank.
    """
    raw = apply_preprocessor(stats, table, mode="raw_imputed")
    out = pd.DataFrame(raw, columns=stats.columns, index=table.index)
    for name in stats.categorical:
        col = table[name].astype(object)
        out[name] = col.where(col.notna(), MISSING_TEXT)
    return out


def _format_info(key: str, value) -> str:
    if isinstance(value, str):
        if key == "country":
            return COUNTRY_NAMES.get(value, value)
        return value
    value = float(value)
    if key == "has_multiple_industries":
        return "Multiple Industries" if value >= 0.5 else "Single Industry"
    if value.is_integer():
        return str(int(value))
    return f"{value:.3f}"


def serialize_company(
    features: Mapping[str, object],
    groups: Sequence[tuple[str, Sequence[tuple[str, str]]]] = FEATURE_GROUPS,
    info: Sequence[tuple[str, str]] = COMPANY_INFO,
) -> str:
    """One line per group: ``Group: key=value, key=value``. Ratios use 3 decimals.

    Features absent from ``features`` (dropped from the catalog) are left out.
    """
    shown = ", ".join(f"{key}={_format_info(key, features[fid])}" for key, fid in info if fid in features)
    lines = ["Company Info: " + shown]
    for group, members in groups:
        parts = []
        for key, fid in members:
            if fid not in features:
                continue
            value = float(features[fid])
            if not np.isfinite(value):
                raise ValueError(f"{fid} is not finite; serialize imputed features only")
            parts.append(f"{key}={value:.3f}")
        lines.append(f"{group}: " + ", ".join(parts))
    return "\n".join(lines)


def serialize_frame(frame: pd.DataFrame, **kwargs) -> list[str]:
    return [serialize_company(row, **kwargs) for row in frame.to_dict("records")]
