"""Versioned JSON container for fitted models."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..errors import ConfigError
from .gbt import GradientBoostedTrees
from .logreg import LogisticRegression
from .mlp import MLPClassifier

FORMAT = "distressbench-model"
VERSION = 1
_CLASSES = {"logreg": LogisticRegression, "gbt": GradientBoostedTrees, "mlp": MLPClassifier}


def model_to_dict(model, threshold: float | None = None, preprocessing_ref: str | None = None) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "version": VERSION,
        "family": model.family,
        "params": model.get_params(),
        "state": model.state_dict(),
        "preprocessing_ref": preprocessing_ref,
        "threshold": threshold,
    }


def model_from_dict(payload: dict[str, Any]):
    """Return ``(model, threshold, preprocessing_ref)``."""
    if payload.get("format") != FORMAT:
        raise ConfigError("not a model container")
    if payload.get("version") != VERSION:
        raise ConfigError(f"unsupported model container version {payload.get('version')}")
    family = payload["family"]
    if family not in _CLASSES:
        raise ConfigError(f"unknown model family {family!r}")
    model = _CLASSES[family](**payload["params"]).load_state(payload["state"])
    return model, payload.get("threshold"), payload.get("preprocessing_ref")


def save_model(path: str | Path, model, threshold: float | None = None, preprocessing_ref: str | None = None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, threshold, preprocessing_ref), sort_keys=True))


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text()))
