"""The prompting stage of a pipeline run, one horizon at a time."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import httpx
import numpy as np

from .errors import MetricError, PipelineError
from .evaluation import calibrate_threshold, evaluate_scores, stratified_subsample
from .features.preprocess import apply_preprocessor
from .llm import (
    ClientConfig,
    ICLExample,
    ICLExampleSet,
    PromptTemplate,
    analyze_probability_profile,
    MockState,
    create_mock_app,
    prompt_feature_frame,
    query_endpoint,
    render_prompt,
    select_hard_examples,
    serialize_frame,
    write_exchanges,
)
from .models.gbt import GradientBoostedTrees
from .models.serialize import load_model

if TYPE_CHECKING:
    from .pipeline import Pipeline

DEFAULT_LLM_THRESHOLD = 0.5


def _client(pipe: Pipeline) -> tuple[ClientConfig, httpx.AsyncBaseTransport | None]:
    c = pipe.config.llm
    if pipe.mock_llm:
        cfg = ClientConfig(
            "http://mock/v1", c.model, c.api_key_env, c.max_concurrent, c.timeout, c.retries,
            parse_mode=c.parse_mode, token="mock-token",
        )
        if pipe.mock_state is None:
            pipe.mock_state = MockState()
        return cfg, httpx.ASGITransport(app=create_mock_app(pipe.mock_state))
    cfg = ClientConfig(
        c.base_url, c.model, c.api_key_env, c.max_concurrent, c.timeout, c.retries, parse_mode=c.parse_mode
    )
    cfg.api_key()  # fail before any work when the token is missing
    return cfg, None


def _proxy(pipe: Pipeline, h: int, X_train, y_train):
    name = pipe.config.llm.proxy_model
    if name:
        path = pipe.out / "models" / f"h{h}" / f"{name}.json"
        if not path.exists():
            raise PipelineError(f"proxy model {name!r} not found; run `distressbench train` first")
        return load_model(path)[0]
    return GradientBoostedTrees(100, 3, 0.1, seed=pipe.config.seed).fit(X_train, y_train)


def run_llm_horizon(pipe: Pipeline, h: int, data: dict) -> tuple[list[str], list[str]]:
    cfg = pipe.config.llm
    seed = pipe.config.seed
    client, transport = _client(pipe)
    split, y, stats, feats = data["split"], data["y"], data["stats"], data["features"]
    X_train = apply_preprocessor(stats, feats.iloc[split["train"]], "standardized")
    X_val = apply_preprocessor(stats, feats.iloc[split["validation"]], "standardized")
    y_val = y[split["validation"]]

    proxy = _proxy(pipe, h, X_train, y[split["train"]])
    pos_pick, neg_pick = select_hard_examples(proxy.predict_proba(X_val), y_val, cfg.k)
    val_rows = split["validation"]
    pick_rows = np.concatenate([val_rows[pos_pick], val_rows[neg_pick]])
    pick_text = serialize_frame(prompt_feature_frame(feats.iloc[pick_rows], stats))
    examples = ICLExampleSet(
        tuple(ICLExample(int(r), t, 1) for r, t in zip(pick_rows[: cfg.k], pick_text[: cfg.k])),
        tuple(ICLExample(int(r), t, 0) for r, t in zip(pick_rows[cfg.k :], pick_text[cfg.k :])),
    )

    calib_rows = val_rows[stratified_subsample(y_val, cfg.calibration_rows, seed)]
    test_all = split["test"]
    test_rows = test_all if cfg.test_rows is None else test_all[stratified_subsample(y[test_all], cfg.test_rows, seed)]
    if set(examples.rows) & set(test_rows.tolist()):
        raise PipelineError("an in-context example is also a test row")
    calib_text = serialize_frame(prompt_feature_frame(feats.iloc[calib_rows], stats))
    test_text = serialize_frame(prompt_feature_frame(feats.iloc[test_rows], stats))
    from .pipeline import subset_fingerprint

    template = PromptTemplate()
    ldir = pipe.out / "llm" / f"h{h}"
    ldir.mkdir(parents=True, exist_ok=True)
    outputs, clocked = [], []
    for mode in cfg.modes:
        ex = examples if mode == "icl" else None
        prompts = [render_prompt(template, t, mode, h, ex) for t in calib_text + test_text]
        exchanges = query_endpoint(client, prompts, transport)
        calib_ex, test_ex = exchanges[: len(calib_text)], exchanges[len(calib_text) :]
        write_exchanges(ldir / f"{mode}_exchanges.jsonl", exchanges)
        clocked.append(f"llm/h{h}/{mode}_exchanges.jsonl")

        ok_c = np.array([e.ok for e in calib_ex])
        p_c = np.array([e.probability if e.ok else np.nan for e in calib_ex])
        note = None
        try:
            threshold = calibrate_threshold(p_c[ok_c], y[calib_rows][ok_c])
        except MetricError as exc:
            threshold, note = DEFAULT_LLM_THRESHOLD, f"calibration fell back to {DEFAULT_LLM_THRESHOLD}: {exc}"
        ok_t = np.array([e.ok for e in test_ex])
        p_t = np.array([e.probability if e.ok else np.nan for e in test_ex])
        failures = int((~ok_t).sum())
        result = evaluate_scores(
            f"llm-{mode}",
            h,
            p_t[ok_t],
            y[test_rows][ok_t],
            threshold,
            test_fingerprint=subset_fingerprint(test_rows),
            parse_failures=failures,
        )
        result.extra["calibration_rows"] = int(len(calib_rows))
        result.extra["calibration_parse_failures"] = int((~ok_c).sum())
        row = result.row()
        row["test_fingerprint"] = result.test_fingerprint
        profile = analyze_probability_profile(p_t[ok_t]) if ok_t.any() else None
        payload = {
            "result": row,
            "threshold_note": note,
            "icl_examples": {"positives": [e.row for e in examples.positives], "negatives": [e.row for e in examples.negatives]}
            if ex
            else None,
            "test_rows": int(len(test_rows)),
            "profile": profile.to_dict() if profile else None,
        }
        (ldir / f"{mode}_result.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        outputs.append(f"llm/h{h}/{mode}_result.json")
        if profile:
            lines = ["bin_low,bin_high,mass"] + [
                f"{lo:.2f},{hi:.2f},{m!r}" for lo, hi, m in zip(profile.bin_edges[:-1], profile.bin_edges[1:], profile.bin_mass)
            ]
            (ldir / f"{mode}_histogram.csv").write_text("\n".join(lines) + "\n")
            outputs.append(f"llm/h{h}/{mode}_histogram.csv")
    return outputs, clocked
