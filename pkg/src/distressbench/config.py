"""Run configuration: one validated tree loaded from TOML or JSON."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional

import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SynthSection(_Section):
    n_companies: int = 1000
    year_span: tuple[int, int] = (2006, 2021)
    target_distress_rate: float = 0.004
    censored_rate: Optional[float] = None
    stress_prob: float = 0.4
    near_miss_prob: float = 0.7
    temporary_breach_prob: float = 0.3
    stagnation_prob: float = 0.2
    missing_rate: float = 0.02


class DataSection(_Section):
    source: Literal["synthetic", "csv"] = "synthetic"
    csv_path: Optional[str] = None
    macro_csv: Optional[str] = None
    columns: dict[str, Optional[str]] = Field(default_factory=dict)
    delimiter: str = ","
    synthetic: SynthSection = Field(default_factory=SynthSection)

    @model_validator(mode="after")
    def _csv_needs_path(self):
        if self.source == "csv" and not self.csv_path:
            raise ValueError("data.csv_path is required when data.source = 'csv'")
        return self


class RuleSection(_Section):
    equity_ta_max: float = 0.0
    ebitda_ta_max: float = 0.0
    current_ratio_max: float = 0.6
    censor_year: int = 2021


class SplitSection(_Section):
    test_size: int = 20_000
    validation_fraction: float = 0.2

    @field_validator("validation_fraction")
    @classmethod
    def _fraction(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")
        return v


class FeaturesSection(_Section):
    drop: list[str] = Field(default_factory=list)  # e.g. ["X9"] to leave out operational status


class ModelSection(_Section):
    name: str
    preset: Optional[str] = None
    family: Optional[str] = None
    grid: Optional[dict[str, list[Any]]] = None
    fixed: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _source(self):
        if self.preset is None and (self.family is None or self.grid is None):
            raise ValueError(f"model {self.name!r} needs a preset or a family plus grid")
        return self


class ScalingSection(_Section):
    enabled: bool = False
    learner: Literal["knn", "gbt"] = "knn"
    knn_k: int = 64
    max_fit_rows: int = 10_000
    partition: bool = True
    min_samples_split: int = 10_000
    max_depth: int = 16
    ensemble_sizes: list[int] = Field(default_factory=lambda: [8])
    ensemble_n: int = 10_000


class LLMSection(_Section):
    enabled: bool = False
    modes: list[Literal["zero_shot", "icl"]] = Field(default_factory=lambda: ["zero_shot", "icl"])
    k: int = 10
    base_url: str = "http://localhost:8000/v1"
    model: str = "mock"
    api_key_env: str = "DISTRESSBENCH_API_KEY"
    max_concurrent: int = 8
    timeout: float = 60.0
    retries: int = 3
    parse_mode: Literal["strict", "lenient"] = "strict"
    calibration_rows: int = 5000
    test_rows: Optional[int] = None
    proxy_model: Optional[str] = None


class TimingSection(_Section):
    enabled: bool = True
    runs: int = 5
    warmup: int = 1


def _default_models() -> list[ModelSection]:
    return [ModelSection(name="logreg", preset="logreg"), ModelSection(name="xgboost", preset="xgboost")]


class RunConfig(_Section):
    seed: int = 42
    out: str = "runs/default"
    horizons: list[int] = Field(default_factory=lambda: [0])
    data: DataSection = Field(default_factory=DataSection)
    rule: RuleSection = Field(default_factory=RuleSection)
    features: FeaturesSection = Field(default_factory=FeaturesSection)
    split: SplitSection = Field(default_factory=SplitSection)
    models: list[ModelSection] = Field(default_factory=_default_models)
    scaling: ScalingSection = Field(default_factory=ScalingSection)
    llm: LLMSection = Field(default_factory=LLMSection)
    timing: TimingSection = Field(default_factory=TimingSection)

    @field_validator("horizons")
    @classmethod
    def _horizons(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("at least one horizon is required")
        bad = [h for h in v if not 0 <= h <= 4]
        if bad:
            raise ValueError(f"horizons must be in 0..4, got {bad}")
        return sorted(set(v))

    @model_validator(mode="after")
    def _unique_names(self):
        names = [m.name for m in self.models]
        if len(names) != len(set(names)):
            raise ValueError(f"model names must be unique: {names}")
        return self

    def snapshot(self) -> dict:
        """Everything that determines results; the output directory is not part of it."""
        return self.model_dump(mode="json", exclude={"out"})


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Parse a TOML or JSON file (or defaults), apply top-level overrides, validate."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text) if path.suffix.lower() == ".json" else tomli.loads(text)
        except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
