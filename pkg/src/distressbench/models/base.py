"""Shared adapter plumbing."""

from __future__ import annotations

from typing import Any, Protocol, runtime_checkable

import numpy as np

from ..errors import ShapeError, TrainingError


@runtime_checkable
class ModelAdapter(Protocol):
    """Fit on a numeric matrix and 0/1 labels; emit a bankruptcy probability per row."""

    family: str

    def fit(self, X: np.ndarray, y: np.ndarray) -> "ModelAdapter": ...

    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...

    def get_params(self) -> dict[str, Any]: ...


def check_training_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y).ravel()
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise ShapeError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0/1")
    if np.unique(y).size < 2:
        raise TrainingError("training labels contain a single class")
    if not np.isfinite(X).all():
        raise TrainingError("X contains missing or non-finite values; impute first")
    return X, y.astype(float)


def check_predict_data(X, n_features: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ShapeError(f"expected {n_features} features, got shape {X.shape}")
    return X


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
