"""Staged end-to-end runs with content-hashed, idempotent artifacts.

Stages: generate, label, featurize, train, evaluate, llm-run, report. Each
stage hashes its inputs (relevant config plus upstream artifact hashes) and is
skipped when the manifest already records a run with the same hash and its
outputs are intact.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd

from . import __version__
from .config import ModelSection, RunConfig
from .data import (
    CsvSchema,
    SynthConfig,
    attach_macro,
    generate_synthetic_panel,
    ingest_csv,
    read_macro_csv,
    write_macro_csv,
    write_panel_csv,
)
from .errors import ConfigError, PipelineError
from .evaluation import (
    SplitPlan,
    build_report,
    calibrate_threshold,
    evaluate_scores,
    stratified_split,
    stratified_subsample,
    horizon_summary_csv,
    time_inference,
)
from .evaluation.metrics import ConfusionMetrics
from .evaluation.report import ModelResult
from .features import default_catalog
from .features.catalog import write_data_dictionary
from .features.engine import compute_feature_table, compute_sector_year_stats
from .features.preprocess import PreprocessStats, apply_preprocessor, fit_preprocessor
from .labeling import DistressRule, build_horizon_dataset
from .models.grid import GridSpec, grid_search, preset
from .models.serialize import load_model, save_model

STAGES = ("generate", "label", "featurize", "train", "evaluate", "llm-run", "report")
UPSTREAM = {
    "label": "generate",
    "featurize": "label",
    "train": "featurize",
    "evaluate": "train",
    "llm-run": "train",
    "report": "evaluate",
}


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def sha256_json(obj: Any) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def subset_fingerprint(rows: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(rows, dtype=np.int64).tobytes()).hexdigest()[:16]


def result_from_row(row: dict) -> ModelResult:
    metrics = ConfusionMetrics(
        row["accuracy"], row["precision"], row["recall"], row["f1"], row["tp"], row["fp"], row["tn"], row["fn"]
    )
    known = {"model", "horizon", "accuracy", "precision", "recall", "f1", "roc_auc", "threshold"}
    known |= {"tp", "fp", "tn", "fn", "n_rows", "parse_failures", "test_fingerprint"}
    extra = {k: v for k, v in row.items() if k not in known}
    return ModelResult(
        row["model"],
        row["horizon"],
        row["threshold"],
        metrics,
        row["roc_auc"],
        row["n_rows"],
        row.get("test_fingerprint", ""),
        row.get("parse_failures"),
        extra,
    )


def _result_row(result: ModelResult) -> dict:
    row = result.row()
    row["test_fingerprint"] = result.test_fingerprint
    return row


class Pipeline:
    """One run directory, owned exclusively while a stage executes."""

    def __init__(self, config: RunConfig, out: str | Path | None = None, force: bool = False, mock_llm: bool = False):
        self.config = config
        self.out = Path(out or config.out)
        self.force = force
        self.mock_llm = mock_llm
        self.mock_state = None  # request instrumentation of the in-process mock, once used
        self.catalog = default_catalog(config.features.drop)
        self.log: Callable[[str], None] = lambda msg: None

    # --- manifest -----------------------------------------------------------

    @property
    def manifest_path(self) -> Path:
        return self.out / "manifest.json"

    def load_manifest(self) -> dict:
        if self.manifest_path.exists():
            return _read_json(self.manifest_path)
        return {
            "tool": {"name": "distressbench", "version": __version__},
            "config": self.config.snapshot(),
            "stages": {},
            "wall_clock": {"created": _now(), "stages": {}},
        }

    def save_manifest(self, manifest: dict) -> None:
        manifest["config"] = self.config.snapshot()
        manifest["wall_clock"]["updated"] = _now()
        _write_json(self.manifest_path, manifest)

    @contextmanager
    def lock(self):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / ".lock"
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise PipelineError(f"{self.out} is locked by another run (remove {path} if that run is dead)") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            path.unlink(missing_ok=True)

    def _outputs_intact(self, record: dict) -> bool:
        return all((self.out / rel).exists() and sha256_file(self.out / rel) == h for rel, h in record["outputs"].items())

    def stage_outputs(self, manifest: dict, stage: str, command: str | None = None) -> dict[str, str]:
        record = manifest["stages"].get(stage)
        if not record or record.get("status") != "done" or not self._outputs_intact(record):
            raise PipelineError(
                f"missing artifacts from stage {stage!r}; run `distressbench {command or stage}` first"
            )
        return record["outputs"]

    def _stage_inputs(self, stage: str, manifest: dict) -> dict:
        c = self.config
        sections = {
            "generate": {"data": c.data.model_dump(mode="json"), "seed": c.seed},
            "label": {"rule": c.rule.model_dump(mode="json"), "horizons": c.horizons},
            "featurize": {
                "split": c.split.model_dump(mode="json"),
                "features": c.features.model_dump(mode="json"),
                "seed": c.seed,
            },
            "train": {
                "models": [m.model_dump(mode="json") for m in c.models],
                "scaling": c.scaling.model_dump(mode="json"),
                "seed": c.seed,
            },
            "evaluate": {"timing": c.timing.model_dump(mode="json")},
            "llm-run": {"llm": c.llm.model_dump(mode="json"), "mock": self.mock_llm, "seed": c.seed},
            "report": {"llm_enabled": self._llm_enabled()},
        }
        inputs: dict[str, Any] = {"stage": stage, "version": __version__, "config": sections[stage]}
        deps = {"report": ("evaluate", "llm-run"), "llm-run": ("featurize", "train")}.get(stage)
        if deps is None and stage in UPSTREAM:
            deps = (UPSTREAM[stage],)
        for dep in deps or ():
            record = manifest["stages"].get(dep)
            inputs[dep] = record["outputs"] if record else None
        return inputs

    def run_stage(self, stage: str) -> bool:
        """Run one stage; returns False when skipped as up to date."""
        if stage not in STAGES:
            raise PipelineError(f"unknown stage {stage!r}")
        with self.lock():
            manifest = self.load_manifest()
            if stage in UPSTREAM:
                self.stage_outputs(manifest, UPSTREAM[stage])
            if stage == "report" and self._llm_enabled():
                self.stage_outputs(manifest, "llm-run")
            inputs = self._stage_inputs(stage, manifest)
            input_hash = sha256_json(inputs)
            record = manifest["stages"].get(stage)
            if (
                not self.force
                and record
                and record.get("status") == "done"
                and record.get("input_hash") == input_hash
                and self._outputs_intact(record)
            ):
                self.log(f"{stage}: up to date, skipped")
                return False
            manifest["stages"][stage] = {"status": "running", "input_hash": input_hash, "outputs": {}}
            self.save_manifest(manifest)
            start = time.perf_counter()
            outputs, clocked = getattr(self, "_" + stage.replace("-", "_"))(manifest)
            manifest["stages"][stage] = {
                "status": "done",
                "input_hash": input_hash,
                "outputs": {rel: sha256_file(self.out / rel) for rel in sorted(outputs)},
            }
            manifest["wall_clock"]["stages"][stage] = {
                "seconds": time.perf_counter() - start,
                "finished": _now(),
                "outputs": {rel: sha256_file(self.out / rel) for rel in sorted(clocked)},
            }
            self.save_manifest(manifest)
            self.log(f"{stage}: done in {time.perf_counter() - start:.1f}s")
            return True

    def run_all(self) -> dict[str, bool]:
        return {stage: self.run_stage(stage) for stage in STAGES}

    # --- loaders ------------------------------------------------------------

    def _llm_enabled(self) -> bool:
        return self.config.llm.enabled or self.mock_llm

    def load_panel(self):
        panel = ingest_csv(self.out / "data" / "panel.csv")
        return attach_macro(panel, read_macro_csv(self.out / "data" / "macro.csv"))

    def load_feature_table(self) -> pd.DataFrame:
        cats = {f.id: str for f in self.catalog if f.categorical}
        table = pd.read_csv(
            self.out / "features" / "table.csv", dtype=cats, keep_default_na=False, na_values={c: [""] for c in cats}
        )
        for f in self.catalog:
            if not f.categorical:
                table[f.id] = pd.to_numeric(table[f.id].replace("", np.nan), errors="coerce").astype(float)
            else:
                table[f.id] = table[f.id].astype(object).where(table[f.id].notna(), None)
        return table

    def load_labels(self, h: int) -> pd.DataFrame:
        return pd.read_csv(self.out / "labels" / f"h{h}.csv", dtype={"company_id": str})

    def horizon_data(self, h: int, table: pd.DataFrame | None = None) -> dict:
        """Labels, split positions, preprocessing stats and raw feature rows for a horizon."""
        table = self.load_feature_table() if table is None else table
        rows = self.load_labels(h)
        split = _read_json(self.out / "features" / f"h{h}_split.json")
        stats = PreprocessStats.from_dict(_read_json(self.out / "features" / f"h{h}_preprocess.json"))
        feats = table.iloc[rows["panel_row"].to_numpy()].reset_index(drop=True)
        return {
            "rows": rows,
            "y": rows["label"].to_numpy(),
            "split": {k: np.asarray(v, dtype=np.int64) for k, v in split.items()},
            "stats": stats,
            "features": feats,
        }

    @staticmethod
    def matrices(data: dict, mode: str = "standardized") -> dict[str, tuple[np.ndarray, np.ndarray]]:
        out = {}
        for part, pos in data["split"].items():
            X = apply_preprocessor(data["stats"], data["features"].iloc[pos], mode)
            out[part] = (X, data["y"][pos])
        return out

    # --- stages -------------------------------------------------------------

    def _generate(self, manifest: dict):
        d = self.config.data
        if d.source == "synthetic":
            s = d.synthetic
            panel = generate_synthetic_panel(SynthConfig(seed=self.config.seed, **s.model_dump()))
            macro = panel.macro
        else:
            panel = ingest_csv(d.csv_path, CsvSchema(dict(d.columns), d.delimiter))
            macro = read_macro_csv(d.macro_csv) if d.macro_csv else None
        if macro is None:
            raise ConfigError("a macro (GDP) table is required: set data.macro_csv")
        (self.out / "data").mkdir(parents=True, exist_ok=True)
        write_panel_csv(panel, self.out / "data" / "panel.csv")
        write_macro_csv(macro, self.out / "data" / "macro.csv")
        return ["data/panel.csv", "data/macro.csv"], []

    def _label(self, manifest: dict):
        panel = self.load_panel()
        rule = DistressRule(**self.config.rule.model_dump())
        (self.out / "labels").mkdir(parents=True, exist_ok=True)
        outputs = []
        for h in self.config.horizons:
            ds = build_horizon_dataset(panel, h, rule)
            ds.rows.to_csv(self.out / "labels" / f"h{h}.csv", index=False, lineterminator="\n")
            _write_json(self.out / "labels" / f"h{h}.manifest.json", ds.manifest())
            outputs += [f"labels/h{h}.csv", f"labels/h{h}.manifest.json"]
        return outputs, []

    def _featurize(self, manifest: dict):
        panel = self.load_panel()
        stats = compute_sector_year_stats(panel, self.catalog)
        table = compute_feature_table(panel, stats, self.catalog, panel.macro)
        fdir = self.out / "features"
        fdir.mkdir(parents=True, exist_ok=True)
        table.to_csv(fdir / "table.csv", index=False, na_rep="", lineterminator="\n")
        write_data_dictionary(self.catalog, fdir / "dictionary.json")
        outputs = ["features/table.csv", "features/dictionary.json"]
        table = self.load_feature_table()  # fit on exactly what later stages read back
        plan = SplitPlan(self.config.split.test_size, self.config.split.validation_fraction, self.config.seed)
        for h in self.config.horizons:
            rows = self.load_labels(h)
            split = stratified_split(rows["label"].to_numpy(), plan)
            _write_json(fdir / f"h{h}_split.json", {k: getattr(split, k).tolist() for k in ("train", "validation", "test")})
            train_feats = table.iloc[rows["panel_row"].to_numpy()[split.train]].reset_index(drop=True)
            _write_json(fdir / f"h{h}_preprocess.json", fit_preprocessor(train_feats).to_dict())
            outputs += [f"features/h{h}_split.json", f"features/h{h}_preprocess.json"]
        return outputs, []

    def _grid_for(self, m: ModelSection) -> GridSpec:
        if m.grid is not None:
            family = m.family or preset(m.preset, self.config.seed).family
            return GridSpec(family, {k: tuple(_tuplify(v)) for k, v in m.grid.items()}, self.config.seed, dict(m.fixed))
        base = preset(m.preset, self.config.seed)
        return GridSpec(base.family, base.params, self.config.seed, {**base.fixed, **m.fixed})

    def _train(self, manifest: dict):
        table = self.load_feature_table()
        outputs = []
        for h in self.config.horizons:
            data = self.horizon_data(h, table)
            mats = self.matrices(data)
            mdir = self.out / "models" / f"h{h}"
            mdir.mkdir(parents=True, exist_ok=True)
            for m in self.config.models:
                grid = self._grid_for(m)
                result = grid_search(grid.family, grid, mats["train"], mats["validation"])
                save_model(mdir / f"{m.name}.json", result.model, result.calibrated_threshold, f"features/h{h}_preprocess.json")
                _write_json(mdir / f"{m.name}_grid.json", result.summary())
                outputs += [f"models/h{h}/{m.name}.json", f"models/h{h}/{m.name}_grid.json"]
                self.log(f"train h={h} {m.name}: validation F1 {result.best_validation_f1:.3f}")
            if self.config.scaling.enabled:
                outputs += self._train_scaling(h, mats, data, mdir)
        return outputs, []

    def _leaf_factory(self):
        from .scaling import GBTLeafLearner, KNNLeafLearner

        s = self.config.scaling
        if s.learner == "knn":
            return lambda: KNNLeafLearner(k=s.knn_k, max_fit_rows=s.max_fit_rows)
        return lambda: GBTLeafLearner(max_fit_rows=s.max_fit_rows, seed=self.config.seed)

    def _train_scaling(self, h: int, mats: dict, data: dict, mdir: Path) -> list[str]:
        """Scaling wrappers are memory-based, so their scores are stored instead of the models."""
        from .scaling import fit_bootstrap_ensemble, fit_partitioned, predict_ensemble, predict_partitioned

        s = self.config.scaling
        factory = self._leaf_factory()
        X_tr, y_tr = mats["train"]
        X_va, y_va = mats["validation"]
        X_te, _ = mats["test"]
        outputs = []
        if s.partition:
            model = fit_partitioned(X_tr, y_tr, factory, s.min_samples_split, s.max_depth, self.config.seed)
            val, test = predict_partitioned(model, X_va), predict_partitioned(model, X_te)
            threshold = calibrate_threshold(val, y_va)
            _write_json(
                mdir / "partitioned_scores.json",
                {"threshold": threshold, "test_scores": test.tolist(), "partition": model.report()},
            )
            outputs.append(f"models/h{h}/partitioned_scores.json")
        for m in s.ensemble_sizes:
            ens = fit_bootstrap_ensemble(X_tr, y_tr, factory, m, min(s.ensemble_n, s.max_fit_rows), self.config.seed)
            val = predict_ensemble(ens, X_va).mean_probability
            threshold = calibrate_threshold(val, y_va)
            test = predict_ensemble(ens, X_te, member_threshold=threshold)
            _write_json(
                mdir / f"ensemble{m}_scores.json",
                {
                    "threshold": threshold,
                    "test_scores": test.mean_probability.tolist(),
                    "votes": test.votes.tolist(),
                    "vote_fraction": test.vote_fraction.tolist(),
                    "m": m,
                    "n": ens.n,
                },
            )
            outputs.append(f"models/h{h}/ensemble{m}_scores.json")
        return outputs

    def _evaluate(self, manifest: dict):
        table = self.load_feature_table()
        outputs, clocked = [], []
        timing_rows = []
        for h in self.config.horizons:
            data = self.horizon_data(h, table)
            test_pos = data["split"]["test"]
            X_te = apply_preprocessor(data["stats"], data["features"].iloc[test_pos], "standardized")
            y_te = data["y"][test_pos]
            fp = subset_fingerprint(test_pos)
            results = []
            for m in self.config.models:
                model, threshold, _ = load_model(self.out / "models" / f"h{h}" / f"{m.name}.json")
                scores = model.predict_proba(X_te)
                results.append(evaluate_scores(m.name, h, scores, y_te, threshold, test_fingerprint=fp))
                if self.config.timing.enabled:
                    rep = time_inference(model.predict_proba, X_te, self.config.timing.runs, self.config.timing.warmup)
                    timing_rows.append({"horizon": h, "model": m.name, **rep.to_dict(), "table": rep.row(m.name)})
            if self.config.scaling.enabled:
                names = (["partitioned"] if self.config.scaling.partition else []) + [
                    f"ensemble{m}" for m in self.config.scaling.ensemble_sizes
                ]
                for name in names:
                    stored = _read_json(self.out / "models" / f"h{h}" / f"{name}_scores.json")
                    res = evaluate_scores(
                        name, h, stored["test_scores"], y_te, stored["threshold"], test_fingerprint=fp
                    )
                    if "votes" in stored:
                        votes = np.asarray(stored["votes"], dtype=float)
                        res.extra["vote_f1"] = evaluate_scores(name, h, votes, y_te, 0.5).metrics.f1
                    results.append(res)
            path = self.out / "eval" / f"h{h}_results.json"
            _write_json(path, [_result_row(r) for r in results])
            outputs.append(f"eval/h{h}_results.json")
        if timing_rows:
            _write_json(self.out / "eval" / "timing.json", timing_rows)
            clocked.append("eval/timing.json")
        return outputs, clocked

    def _llm_run(self, manifest: dict):
        if not self._llm_enabled():
            return [], []
        from .llm_run import run_llm_horizon

        table = self.load_feature_table()
        outputs, clocked = [], []
        for h in self.config.horizons:
            data = self.horizon_data(h, table)
            out, clk = run_llm_horizon(self, h, data)
            outputs += out
            clocked += clk
        return outputs, clocked

    def _report(self, manifest: dict):
        rdir = self.out / "reports"
        rdir.mkdir(parents=True, exist_ok=True)
        outputs = []
        reports = []
        for h in self.config.horizons:
            results = [result_from_row(r) for r in _read_json(self.out / "eval" / f"h{h}_results.json")]
            llm_results = []
            if self._llm_enabled():
                for mode in self.config.llm.modes:
                    path = self.out / "llm" / f"h{h}" / f"{mode}_result.json"
                    llm_results.append(result_from_row(_read_json(path)["result"]))
            same = [r for r in llm_results if r.test_fingerprint == results[0].test_fingerprint]
            report = build_report(results + same, h)
            reports.append(report)
            for suffix, text in (("json", report.to_json()), ("csv", report.to_csv()), ("txt", report.render_text())):
                (rdir / f"h{h}.{suffix}").write_text(text, encoding="utf-8")
                outputs.append(f"reports/h{h}.{suffix}")
            other = [r for r in llm_results if r not in same]
            if other:
                llm_report = build_report(other, h)
                for suffix, text in (("json", llm_report.to_json()), ("csv", llm_report.to_csv()), ("txt", llm_report.render_text())):
                    (rdir / f"h{h}_llm.{suffix}").write_text(text, encoding="utf-8")
                    outputs.append(f"reports/h{h}_llm.{suffix}")
        (rdir / "horizon_summary.csv").write_text(horizon_summary_csv(reports), encoding="utf-8")
        outputs.append("reports/horizon_summary.csv")
        return outputs, []


def _tuplify(values: list) -> list:
    return [tuple(v) if isinstance(v, list) else v for v in values]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def strip_wall_clock(manifest: dict) -> dict:
    """Manifest without wall-clock fields, for reproducibility comparisons."""
    return {k: v for k, v in manifest.items() if k != "wall_clock"}
