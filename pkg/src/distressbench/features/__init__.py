from .catalog import DERIVED, KINDS, FeatureDef, default_catalog, validate_catalog, write_data_dictionary
from .engine import (
    FeatureVector,
    SectorYearStats,
    compute_feature_table,
    compute_features,
    compute_sector_year_stats,
    frame_to_vectors,
    vectors_to_frame,
)
from .preprocess import PreprocessStats, apply_preprocessor, fit_preprocessor

__all__ = [
    "DERIVED",
    "KINDS",
    "FeatureDef",
    "FeatureVector",
    "PreprocessStats",
    "SectorYearStats",
    "apply_preprocessor",
    "compute_feature_table",
    "compute_features",
    "compute_sector_year_stats",
    "default_catalog",
    "fit_preprocessor",
    "frame_to_vectors",
    "validate_catalog",
    "vectors_to_frame",
    "write_data_dictionary",
]
