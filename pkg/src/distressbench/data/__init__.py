from .records import (
    CATEGORICAL_META,
    COUNTRY_NAMES,
    META_FIELDS,
    NUMERIC_META,
    STATEMENT_FIELDS,
    CompanyYearRecord,
    MacroTable,
    Panel,
    RawStatement,
    attach_macro,
    sector_name,
)
from .csvio import CsvSchema, ingest_csv, read_macro_csv, write_macro_csv, write_panel_csv
from .synth import SynthConfig, generate_synthetic_panel, synthetic_macro_table

__all__ = [
    "CATEGORICAL_META",
    "COUNTRY_NAMES",
    "META_FIELDS",
    "NUMERIC_META",
    "STATEMENT_FIELDS",
    "CompanyYearRecord",
    "CsvSchema",
    "MacroTable",
    "Panel",
    "RawStatement",
    "SynthConfig",
    "attach_macro",
    "generate_synthetic_panel",
    "ingest_csv",
    "read_macro_csv",
    "sector_name",
    "synthetic_macro_table",
    "write_macro_csv",
    "write_panel_csv",
]
