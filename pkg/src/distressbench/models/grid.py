"""Hyperparameter grids and validation-F1 grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import ConfigError
from ..evaluation.metrics import calibrate_threshold, confusion_metrics
from .base import ModelAdapter
from .gbt import GradientBoostedTrees
from .logreg import LogisticRegression
from .mlp import MLPClassifier

FAMILIES = ("logreg", "gbt", "mlp")


@dataclass(frozen=True)
class GridSpec:
    """Ordered parameter lists per family; enumeration is the cartesian product in key order."""

    family: str
    params: dict[str, tuple]
    seed: int = 42
    fixed: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        if not self.params or any(len(v) == 0 for v in self.params.values()):
            raise ConfigError(f"grid for {self.family} is empty")
        for key in ("learning_rate", "learning_rate_init"):
            if any(not lr > 0 for lr in self.params.get(key, ())):
                raise ConfigError(f"{key} values must be > 0")
        object.__setattr__(self, "params", {k: tuple(v) for k, v in self.params.items()})

    def points(self) -> list[dict[str, Any]]:
        keys = list(self.params)
        return [dict(self.fixed, **dict(zip(keys, combo))) for combo in itertools.product(*self.params.values())]

    def __len__(self) -> int:
        return int(np.prod([len(v) for v in self.params.values()]))


def logreg_c_values(low: float = 0.001, high: float = 1.0, num: int = 5, endpoints_are_exponents: bool = False):
    """The logistic-regression C range.

    The default reads the endpoints as values (log-spaced points between them);
    ``endpoints_are_exponents`` reproduces the literal ``np.logspace`` reading,
    i.e. powers of ten between ``10**low`` and ``10**high``.
    """
    if endpoints_are_exponents:
        return tuple(float(v) for v in np.logspace(low, high, num))
    if not (low > 0 and high > 0):
        raise ConfigError("C endpoints must be > 0 when read as values")
    return tuple(float(v) for v in np.geomspace(low, high, num))


def preset(name: str, seed: int = 42, c_endpoints_are_exponents: bool = False) -> GridSpec:
    """Named grids. The three boosting presets run on the same engine."""
    if name == "logreg":
        return GridSpec("logreg", {"c": logreg_c_values(endpoints_are_exponents=c_endpoints_are_exponents)}, seed)
    if name == "mlp":
        return GridSpec(
            "mlp",
            {
                "hidden_sizes": ((32, 32), (64, 64), (128, 128), (256, 256), (512, 512)),
                "l2_alpha": (1e-4, 1e-3, 1e-2),
                "learning_rate_init": (1e-3, 1e-2),
            },
            seed,
        )
    if name == "xgboost":
        return GridSpec(
            "gbt",
            {"n_estimators": (100, 200, 500), "max_depth": (3, 5, 7), "learning_rate": (0.01, 0.05, 0.1, 0.2)},
            seed,
        )
    if name == "lightgbm":
        # depth -1 means unlimited depth, which the reference library bounds by 31 leaves
        return GridSpec(
            "gbt",
            {
                "n_estimators": (100, 200),
                "max_depth": (None, 5, 10),
                "learning_rate": (0.01, 0.05, 0.1, 0.2),
            },
            seed,
            fixed={"max_leaves": 31},
        )
    if name == "catboost":
        return GridSpec(
            "gbt",
            {"n_estimators": (100, 200), "max_depth": (4, 6, 8), "learning_rate": (0.01, 0.05, 0.1)},
            seed,
        )
    raise ConfigError(f"unknown grid preset {name!r}")


PRESETS = ("logreg", "mlp", "xgboost", "lightgbm", "catboost")


def make_model(family: str, params: dict[str, Any], seed: int = 42) -> ModelAdapter:
    if family == "logreg":
        return LogisticRegression(**params)
    if family == "gbt":
        return GradientBoostedTrees(**dict(params, seed=seed))
    if family == "mlp":
        return MLPClassifier(**dict(params, seed=seed))
    raise ConfigError(f"unknown model family {family!r}")


@dataclass
class GridSearchResult:
    family: str
    best_params: dict[str, Any]
    best_validation_f1: float
    calibrated_threshold: float
    table: list[dict[str, Any]]
    model: ModelAdapter

    def summary(self) -> dict:
        return {
            "family": self.family,
            "best_params": self.best_params,
            "best_validation_f1": self.best_validation_f1,
            "calibrated_threshold": self.calibrated_threshold,
            "table": self.table,
        }


def grid_search(
    family: str,
    grid: GridSpec,
    train: tuple[np.ndarray, np.ndarray],
    validation: tuple[np.ndarray, np.ndarray],
    model_factory: Callable[[str, dict, int], ModelAdapter] = make_model,
) -> GridSearchResult:
    """Fit each grid point on ``train``; keep the one with the best validation F1.

    Each candidate's threshold is calibrated on the validation scores, and the
    winner's threshold is the one to use at test time. Ties keep the earlier
    grid point.
    """
    if grid.family != family:
        raise ConfigError(f"grid is for {grid.family}, not {family}")
    points = grid.points()
    if not points:
        raise ConfigError("empty grid")
    X_tr, y_tr = train
    X_va, y_va = validation
    table = []
    best = None
    for i, params in enumerate(points):
        model = model_factory(family, params, grid.seed).fit(X_tr, y_tr)
        scores = model.predict_proba(X_va)
        threshold = calibrate_threshold(scores, y_va)
        f1 = confusion_metrics(scores, y_va, threshold).f1
        table.append({"index": i, "params": _jsonable(params), "validation_f1": f1, "threshold": threshold})
        if best is None or f1 > best[0]:
            best = (f1, i, threshold, model)
    f1, i, threshold, model = best
    return GridSearchResult(family, _jsonable(points[i]), f1, threshold, table, model)


def _jsonable(params: dict[str, Any]) -> dict[str, Any]:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}


def grid_points_for(names: Sequence[str], seed: int = 42) -> dict[str, GridSpec]:
    return {name: preset(name, seed) for name in names}
