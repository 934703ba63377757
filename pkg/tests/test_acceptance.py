"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from distressbench.config import RunConfig, load_config
from distressbench.data import SynthConfig, generate_synthetic_panel
from distressbench.evaluation import (
    SplitPlan,
    calibrate_threshold,
    confusion_metrics,
    roc_auc,
    stratified_split,
    time_inference,
)
from distressbench.features import compute_feature_table, compute_sector_year_stats
from distressbench.features.preprocess import apply_preprocessor, fit_preprocessor
from distressbench.labeling import build_horizon_dataset
from distressbench.models.gbt import GradientBoostedTrees
from distressbench.models.logreg import LogisticRegression
from distressbench.models.mlp import init_params, loss_and_grad
from distressbench.pipeline import Pipeline, strip_wall_clock
from distressbench.scaling import (
    GBTLeafLearner,
    KNNLeafLearner,
    fit_bootstrap_ensemble,
    fit_partitioned,
    majority_vote,
    predict_ensemble,
    predict_partitioned,
)

sys.path.insert(0, str(Path(__file__).parent))
from oracles import (  # noqa: E402
    LABELING_EXPECTED,
    count_confusion,
    exhaustive_best_f1,
    labeling_panel,
    majority_oracle,
    numeric_grad,
    pairwise_auc,
)

ROOT = Path(__file__).resolve().parents[1]
RESULTS: list[str] = []


def record(n: int, title: str, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    ok = ok and elapsed < budget
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}: {detail}; {elapsed:.1f}s (< {budget:g}s)"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_c1_labeling_oracle():
    t0 = time.perf_counter()
    panel = labeling_panel()
    got, counts = {}, []
    for h in range(5):
        rows = build_horizon_dataset(panel, h).rows
        pos = rows[rows["label"] == 1]
        got[h] = set(zip(pos["company_id"], pos["report_year"]))
        counts.append(len(pos))
    elapsed = time.perf_counter() - t0
    exact = all(got[h] == LABELING_EXPECTED[h] for h in range(5))
    monotone = all(b <= a for a, b in zip(counts, counts[1:]))
    record(1, "labeling oracle", exact and monotone, f"exact sets h0..4={exact}, positives {counts}", elapsed, 1)


def test_c2_metric_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_auc, confusion_ok, f1_ok = 0.0, True, True
    for _ in range(200):
        n = int(rng.integers(2, 51))
        y = rng.integers(0, 2, n)
        y[rng.integers(0, n)] = 1 - y[0]  # both classes present
        y[0] = 1 - y[-1] if y.min() == y.max() else y[0]
        s = rng.random(n).round(int(rng.integers(1, 4)))  # coarse rounding produces ties
        worst_auc = max(worst_auc, abs(roc_auc(s, y) - pairwise_auc(s, y)))
        t = float(rng.choice(s))
        m = confusion_metrics(s, y, t)
        confusion_ok &= (m.tp, m.fp, m.tn, m.fn) == count_confusion(s, y, t)
        best = exhaustive_best_f1(s, y)
        f1_ok &= abs(confusion_metrics(s, y, calibrate_threshold(s, y)).f1 - best) <= 1e-12
    elapsed = time.perf_counter() - t0
    ok = worst_auc <= 1e-12 and confusion_ok and f1_ok
    detail = f"max |auc - pairwise| = {worst_auc:.1e} (<= 1e-12), confusion exact={confusion_ok}, best F1={f1_ok}"
    record(2, "metric oracles", ok, detail, elapsed, 10)


def test_c3_scaling_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    X = rng.normal(size=(2000, 5))
    y = (X[:, 0] * X[:, 1] > 0.2).astype(int)
    single = True
    for factory in (lambda: KNNLeafLearner(k=32), lambda: GBTLeafLearner(n_estimators=30, seed=1)):
        model = fit_partitioned(X, y, factory, min_samples_split=10_000)
        single &= model.router.n_leaves == 1
        single &= bool(np.array_equal(predict_partitioned(model, X), factory().fit(X, y).predict_proba(X)))
    ens = fit_bootstrap_ensemble(X, y, lambda: KNNLeafLearner(k=32), m=1, n=1500, seed=4)
    member = KNNLeafLearner(k=32).fit(X[ens.subsets[0]], y[ens.subsets[0]]).predict_proba(X)
    pred = predict_ensemble(ens, X)
    m1 = bool(np.array_equal(pred.mean_probability, member)) and bool(
        np.array_equal(pred.votes, (member >= 0.5).astype(np.int8))
    )
    votes_ok = True
    for _ in range(1000):
        votes = rng.integers(0, 2, size=(int(rng.integers(1, 12)), int(rng.integers(1, 20))))
        votes_ok &= majority_vote(votes).tolist() == majority_oracle(votes.tolist())
    elapsed = time.perf_counter() - t0
    detail = f"single-leaf bit-identical={single}, m=1 ensemble identical={m1}, 1000 vote matrices={votes_ok}"
    record(3, "scaling-wrapper identities", single and m1 and votes_ok, detail, elapsed, 30)


def _c4_seed(seed: int) -> dict:
    panel = generate_synthetic_panel(SynthConfig(n_companies=50_000, target_distress_rate=0.004, seed=seed))
    table = compute_feature_table(panel, compute_sector_year_stats(panel), macro=panel.macro)
    out = {}
    for h in (0, 2):
        rows = build_horizon_dataset(panel, h).rows
        feats = table.iloc[rows["panel_row"].to_numpy()].reset_index(drop=True)
        y = rows["label"].to_numpy()
        split = stratified_split(y, SplitPlan(seed=seed))
        stats = fit_preprocessor(feats.iloc[split.train])
        X_tr = apply_preprocessor(stats, feats.iloc[split.train])
        X_te = apply_preprocessor(stats, feats.iloc[split.test])
        lr = LogisticRegression(c=1.0).fit(X_tr, y[split.train])
        gbt = GradientBoostedTrees(100, 3, 0.1, seed=seed).fit(X_tr, y[split.train])
        out[h] = (roc_auc(lr.predict_proba(X_te), y[split.test]), roc_auc(gbt.predict_proba(X_te), y[split.test]))
        if h == 0:
            out["rate"] = y.mean()
    return out


@pytest.mark.slow
def test_c4_model_ordering():
    t0 = time.perf_counter()
    ok, parts = True, []
    for seed in (42, 43, 44):
        r = _c4_seed(seed)
        (lr0, g0), (_, g2) = r[0], r[2]
        ok &= g0 - lr0 >= 0.05 and g0 >= 0.90 and g2 <= g0 + 0.02
        parts.append(f"seed {seed}: rate {r['rate']:.4f} LR {lr0:.3f} GBT {g0:.3f} GBT@h2 {g2:.3f}")
    elapsed = time.perf_counter() - t0
    detail = "; ".join(parts) + " (gap >= 0.05, GBT >= 0.90, h2 <= h0 + 0.02)"
    record(4, "model sanity ordering", ok, detail, elapsed, 600)


def test_c5_mlp_gradient():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        params = init_params((8, 16, 16, 1), rng)
        for b in params[1::2]:
            b += rng.normal(scale=0.1, size=b.shape)
        X = rng.normal(size=(32, 8))
        y = rng.integers(0, 2, 32).astype(float)
        _, grads = loss_and_grad(params, X, y, 1e-2)
        num = numeric_grad(lambda: loss_and_grad(params, X, y, 1e-2)[0], params)
        for a, n in zip(grads, num):
            rel = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
            worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - t0
    record(5, "MLP gradient check", worst < 1e-4, f"max relative error {worst:.2e} (< 1e-4) over 10 seeds", elapsed, 30)


C6_CONFIG = {
    "seed": 42,
    "horizons": [0],
    "data": {"synthetic": {"n_companies": 3000, "target_distress_rate": 0.03}},
    "split": {"test_size": 4000},
    "models": [{"name": "logreg", "family": "logreg", "grid": {"c": [1.0]}}],
    "llm": {"k": 10, "calibration_rows": 500, "test_rows": 2000, "max_concurrent": 8},
    "timing": {"enabled": False},
}


def test_c6_llm_protocol(tmp_path):
    from distressbench.llm import select_hard_examples

    pipe = Pipeline(RunConfig.model_validate(C6_CONFIG), out=tmp_path, mock_llm=True)
    for stage in ("generate", "label", "featurize", "train"):
        pipe.run_stage(stage)
    t0 = time.perf_counter()
    pipe.run_stage("llm-run")
    elapsed = time.perf_counter() - t0

    data = pipe.horizon_data(0)
    split, y = data["split"], data["y"]
    X_tr = apply_preprocessor(data["stats"], data["features"].iloc[split["train"]])
    X_va = apply_preprocessor(data["stats"], data["features"].iloc[split["validation"]])
    proxy = GradientBoostedTrees(100, 3, 0.1, seed=42).fit(X_tr, y[split["train"]])
    scores, y_va = proxy.predict_proba(X_va), y[split["validation"]]
    pos_o = sorted(np.flatnonzero(y_va == 1), key=lambda i: (scores[i], i))[:10]
    neg_o = sorted(np.flatnonzero(y_va == 0), key=lambda i: (-scores[i], i))[:10]
    assert select_hard_examples(scores, y_va, 10)[0].tolist() == pos_o

    ok, parts = True, []
    for mode in ("zero_shot", "icl"):
        res = json.loads((tmp_path / "llm" / "h0" / f"{mode}_result.json").read_text())
        r, prof = res["result"], res["profile"]
        values = {v for v, _ in prof["table"]}
        ok &= r["parse_failures"] == 0 and r["n_rows"] == 2000
        ok &= prof["top_mass"]["4"] == 1.0 and values <= {0.1, 0.2, 0.7, 0.9}
        parts.append(f"{mode}: rows {r['n_rows']} parse failures {r['parse_failures']} top-4 mass {prof['top_mass']['4']}")
        if mode == "icl":
            ex = res["icl_examples"]
            val = split["validation"]
            ok &= ex["positives"] == val[pos_o].tolist() and ex["negatives"] == val[neg_o].tolist()
            ok &= set(ex["positives"] + ex["negatives"]) <= set(val.tolist())
            parts.append(f"ICL {len(ex['positives'])}+{len(ex['negatives'])} validation rows match sort oracle")
    peak = pipe.mock_state.peak
    ok &= peak <= 8
    detail = "; ".join(parts) + f"; concurrency peak {peak} (<= 8)"
    record(6, "LLM protocol offline", ok, detail, elapsed, 120)


def test_c7_timing_harness():
    t0 = time.perf_counter()
    batch = np.zeros((256, 4))
    rep = time_inference(lambda b: time.sleep(0.010), batch, runs=10, warmup=1)
    identity = abs(rep.throughput * rep.mean - rep.batch_size) <= 1e-9 * rep.batch_size
    delay_ok = abs(rep.mean - 0.010) <= 0.2 * 0.010
    fields = {"mean", "std", "throughput", "hardware_note"} <= set(rep.to_dict())
    row = rep.row("sleep")
    fields &= {"Time (s)", "Throughput (samples/s)", "Hardware"} <= set(row)
    elapsed = time.perf_counter() - t0
    detail = f"throughput x mean identity={identity}, mean {rep.mean * 1000:.2f} ms vs 10 ms (+/-20%), fields={fields}"
    record(7, "timing harness", identity and delay_ok and fields, detail, elapsed, 60)


def test_c8_preprocessing_invariants():
    t0 = time.perf_counter()
    panel = generate_synthetic_panel(SynthConfig(n_companies=3000, seed=8))
    table = compute_feature_table(panel, compute_sector_year_stats(panel), macro=panel.macro)
    rows = build_horizon_dataset(panel, 0).rows
    feats = table.iloc[rows["panel_row"].to_numpy()].reset_index(drop=True)
    split = stratified_split(rows["label"].to_numpy(), SplitPlan(test_size=3000, seed=8))
    train = feats.iloc[split.train]
    stats = fit_preprocessor(train)
    Z = apply_preprocessor(stats, train, "standardized")
    R = apply_preprocessor(stats, train, "raw_imputed")
    numeric = [j for j, c in enumerate(stats.columns) if c not in stats.categorical]
    varying = [j for j in range(Z.shape[1]) if stats.stds[stats.columns[j]] > 0]
    max_mean = float(np.max(np.abs(Z[:, varying].mean(axis=0))))
    max_std = float(np.max(np.abs(Z[:, varying].std(axis=0) - 1)))
    raw = train.iloc[:, numeric].to_numpy(dtype=float)
    observed = ~np.isnan(raw)
    untouched = bool(np.array_equal(R[:, numeric][observed], raw[observed]))
    restored = Z[:, numeric] * np.array([stats.stds[stats.columns[j]] or 1.0 for j in numeric]) + np.array(
        [stats.means[stats.columns[j]] for j in numeric]
    )
    imputation_ok = bool(np.allclose(restored[observed], raw[observed], rtol=1e-9, atol=1e-9))
    elapsed = time.perf_counter() - t0
    ok = max_mean < 1e-9 and max_std < 1e-9 and untouched and imputation_ok
    detail = (
        f"max |mean| {max_mean:.1e}, max |std - 1| {max_std:.1e} (< 1e-9) on {len(varying)} columns; "
        f"raw_imputed bit-identical={untouched}; observed values preserved={imputation_ok}"
    )
    record(8, "preprocessing invariants", ok, detail, elapsed, 30)


@pytest.mark.slow
def test_c9_reproducibility(tmp_path):
    t0 = time.perf_counter()
    config = load_config(ROOT / "configs" / "small.toml")
    manifests, reports = [], []
    for name in ("a", "b"):
        out = tmp_path / name
        Pipeline(config, out=out, mock_llm=True).run_all()
        manifests.append(strip_wall_clock(json.loads((out / "manifest.json").read_text())))
        reports.append({p.name: p.read_bytes() for p in sorted((out / "reports").iterdir())})
    elapsed = time.perf_counter() - t0
    same_reports = reports[0] == reports[1] and len(reports[0]) > 0
    same_manifest = manifests[0] == manifests[1]
    detail = f"{len(reports[0])} report files byte-identical={same_reports}; manifests equal={same_manifest}"
    record(9, "end-to-end reproducibility", same_reports and same_manifest, detail, elapsed, 900)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
