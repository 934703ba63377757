"""Train-fitted imputation, label encoding and standardization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from ..errors import ShapeError
from .engine import FeatureVector, vectors_to_frame

UNSEEN_CODE = 0
MODES = ("standardized", "raw_imputed")


@dataclass
class PreprocessStats:
    columns: list[str]
    categorical: list[str]
    medians: dict[str, float]
    means: dict[str, float]
    stds: dict[str, float]
    encodings: dict[str, dict[str, int]]
    all_missing: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "columns": self.columns,
            "categorical": self.categorical,
            "medians": self.medians,
            "means": self.means,
            "stds": self.stds,
            "encodings": self.encodings,
            "all_missing": self.all_missing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PreprocessStats:
        return cls(**data)


def _as_frame(vectors) -> pd.DataFrame:
    if isinstance(vectors, pd.DataFrame):
        return vectors
    return vectors_to_frame(list(vectors))


def _is_categorical(col: pd.Series) -> bool:
    return col.dtype == object and col.map(lambda v: isinstance(v, str)).any()


def _encode(col: pd.Series, table: dict[str, int]) -> np.ndarray:
    return np.array([table.get(v, UNSEEN_CODE) if isinstance(v, str) else UNSEEN_CODE for v in col], dtype=float)


def fit_preprocessor(train: pd.DataFrame | Sequence[FeatureVector]) -> PreprocessStats:
    """Medians over observed values; mean/std (ddof=0) over the imputed column.

    Categorical columns get codes 1..K in first-seen order; code 0 is reserved
    for unseen and missing categories. A numeric column with no observed
    value gets median 0 and is listed in ``all_missing``.
    """
    frame = _as_frame(train)
    if len(frame) == 0:
        raise ValueError("cannot fit preprocessing on an empty training set")
    columns = list(frame.columns)
    categorical, medians, means, stds, encodings, all_missing = [], {}, {}, {}, {}, []
    for name in columns:
        col = frame[name]
        if _is_categorical(col):
            categorical.append(name)
            table: dict[str, int] = {}
            for v in col:
                if isinstance(v, str) and v not in table:
                    table[v] = len(table) + 1
            encodings[name] = table
            x = _encode(col, table)
            medians[name] = float(UNSEEN_CODE)
        else:
            x = col.to_numpy(dtype=float)
            observed = x[~np.isnan(x)]
            if observed.size == 0:
                medians[name] = 0.0
                all_missing.append(name)
            else:
                medians[name] = float(np.median(observed))
            x = np.where(np.isnan(x), medians[name], x)
        means[name] = float(x.mean())
        stds[name] = float(x.std())
    return PreprocessStats(columns, categorical, medians, means, stds, encodings, all_missing)


def apply_preprocessor(
    stats: PreprocessStats, vectors: pd.DataFrame | Sequence[FeatureVector], mode: str = "standardized"
) -> np.ndarray:
    """Numeric matrix in ``stats.columns`` order.

    ``standardized`` imputes then applies ``(x - mean) / std`` (std 0 divides
    by 1); ``raw_imputed`` only imputes and encodes, leaving observed values
    untouched.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    frame = _as_frame(vectors)
    if list(frame.columns) != stats.columns:
        raise ShapeError(f"expected {len(stats.columns)} features in fitted order, got {frame.shape[1]}")
    out = np.empty((len(frame), len(stats.columns)))
    cats = set(stats.categorical)
    for j, name in enumerate(stats.columns):
        col = frame[name]
        if name in cats:
            x = _encode(col, stats.encodings[name])
        else:
            x = col.to_numpy(dtype=float)
            x = np.where(np.isnan(x), stats.medians[name], x)
        if mode == "standardized":
            std = stats.stds[name]
            x = (x - stats.means[name]) / (std if std > 0 else 1.0)
        out[:, j] = x
    return out
