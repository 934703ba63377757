from __future__ import annotations

import asyncio

import httpx
import numpy as np
import pandas as pd
import pytest

from distressbench.errors import ConfigError, SelectionError
from distressbench.features.preprocess import fit_preprocessor
from distressbench.llm import (
    ClientConfig,
    ICLExample,
    ICLExampleSet,
    PromptTemplate,
    analyze_probability_profile,
    create_mock_app,
    mock_reply,
    parse_response,
    prompt_feature_frame,
    query_endpoint,
    read_exchanges,
    render_prompt,
    select_hard_examples,
    serialize_company,
    serialize_frame,
    write_exchanges,
)
from distressbench.llm.mock import MockState
from distressbench.llm.prompt import EXAMPLES_HEADER, TARGET_CUE, TARGET_HEADER
from distressbench.llm.serialize import COMPANY_INFO, FEATURE_GROUPS


def _features(**over):
    row = {fid: 0.5 for _, group in FEATURE_GROUPS for _, fid in group}
    row.update({fid: "x" for _, fid in COMPANY_INFO})
    row.update({"X1": "HU", "X2": 0.0, "X14": 2019.0, "X6": 31.0, "X98": 0.0, "X59": 0.0})
    row.update(over)
    return row


# --- serialization ----------------------------------------------------------


def test_serialize_company_format():
    text = serialize_company(_features(X21=1.23456, X98=1.0))
    lines = text.splitlines()
    assert lines[0].startswith("Company Info: country=Hungary, ")
    assert "has_multiple_industries=Single Industry" in lines[0]
    assert "year=2019" in lines[0] and "naics_2digit=31" in lines[0]
    assert "Current_ratio=1.235" in text
    assert lines[-1] == "Risk Flags: Insolvency_flag=1.000, Loss_flag=0.000"
    assert [line.split(":")[0] for line in lines[1:]] == [g for g, _ in FEATURE_GROUPS]


def test_serialize_rejects_nan():
    with pytest.raises(ValueError):
        serialize_company(_features(X21=float("nan")))


def test_prompt_frame_is_unscaled_and_complete():
    table = pd.DataFrame(
        {
            "X1": pd.Series(["PL", None, "CZ"], dtype=object),
            "X21": [1.5, np.nan, 3.0],
        }
    )
    stats = fit_preprocessor(table)
    frame = prompt_feature_frame(table, stats)
    assert frame["X21"].tolist() == [1.5, 2.25, 3.0]
    assert frame["X1"].tolist() == ["PL", "unknown", "CZ"]


# --- prompt -----------------------------------------------------------------


def _examples(k=2):
    pos = tuple(ICLExample(i, f"pos{i}", 1) for i in range(k))
    neg = tuple(ICLExample(10 + i, f"neg{i}", 0) for i in range(k))
    return ICLExampleSet(pos, neg)


def test_render_zero_shot_and_icl():
    t = PromptTemplate()
    zs = render_prompt(t, "TARGET", "zero_shot", 2)
    assert zs.endswith(f"{TARGET_HEADER}\nTARGET\n{TARGET_CUE}")
    assert "two years after" in zs and EXAMPLES_HEADER not in zs
    icl = render_prompt(t, "TARGET", "icl", 0, _examples())
    assert icl.index(EXAMPLES_HEADER) < icl.index(TARGET_HEADER)
    order = [icl.index(s) for s in ("neg0", "pos0", "neg1", "pos1")]
    assert order == sorted(order)
    assert "pos0\nPrediction: 1" in icl and "neg0\nPrediction: 0" in icl


def test_render_errors():
    t = PromptTemplate()
    with pytest.raises(ValueError):
        render_prompt(t, "x", "icl", 0)
    with pytest.raises(ValueError):
        render_prompt(t, "x", "few", 0)
    with pytest.raises(ValueError):
        render_prompt(t, "x", "zero_shot", 7)


def test_hard_example_selection_matches_sort():
    rng = np.random.default_rng(0)
    scores = rng.choice([0.1, 0.2, 0.3, 0.5, 0.9], 200)
    labels = (rng.random(200) < 0.2).astype(int)
    pos, neg = select_hard_examples(scores, labels, 10)
    pos_oracle = sorted(np.flatnonzero(labels == 1), key=lambda i: (scores[i], i))[:10]
    neg_oracle = sorted(np.flatnonzero(labels == 0), key=lambda i: (-scores[i], i))[:10]
    assert pos.tolist() == pos_oracle and neg.tolist() == neg_oracle
    with pytest.raises(SelectionError):
        select_hard_examples(scores[:5], np.array([1, 0, 0, 0, 0]), 2)


# --- parsing ----------------------------------------------------------------


@pytest.mark.parametrize(
    "text,mode,expect",
    [
        ("1,0.9", "strict", (1, 0.9)),
        (" 0 , .25 \n", "strict", (0, 0.25)),
        ("Answer: 1,0.7", "strict", None),
        ("Answer: 1,0.7", "lenient", (1, 0.7)),
        ("1,1.5", "strict", None),
        ("I think 1,1.2", "lenient", None),
        ("2,0.5", "strict", None),
        ("", "lenient", None),
    ],
)
def test_parse_response(text, mode, expect):
    r = parse_response(text, mode)
    if expect is None:
        assert not r.ok and r.error
    else:
        assert r.ok and (r.label, r.probability) == expect


def test_parse_mode_checked():
    with pytest.raises(ValueError):
        parse_response("1,0.5", "fuzzy")


# --- mock + client ----------------------------------------------------------


def test_mock_reply_reads_target_flags_only():
    head = "Insolvency_flag=1.000, Loss_flag=1.000\n" + TARGET_HEADER
    assert mock_reply(head + "\nRisk Flags: Insolvency_flag=0.000, Loss_flag=0.000") == "0,0.1"
    assert mock_reply(head + "\nRisk Flags: Insolvency_flag=1.000, Loss_flag=0.000") == "1,0.7"
    assert mock_reply(head + "\nRisk Flags: Insolvency_flag=0.000, Loss_flag=1.000") == "0,0.2"
    assert mock_reply(head + "\nRisk Flags: Insolvency_flag=1.000, Loss_flag=1.000") == "1,0.9"


def _client(state=None, **kw):
    cfg = ClientConfig("http://mock/v1", "m", token="t", backoff_base=0.0, **kw)
    return cfg, httpx.ASGITransport(app=create_mock_app(state))


def test_client_order_concurrency_and_retries():
    state = MockState(delay=0.01, fail_first=2)
    cfg, transport = _client(state, max_concurrent=4)
    prompts = [f"{TARGET_HEADER}\nInsolvency_flag={i % 2}.000 #{i}" for i in range(30)]
    out = query_endpoint(cfg, prompts, transport)
    assert [e.index for e in out] == list(range(30))
    assert all(e.ok and e.attempts == 3 for e in out)
    assert [e.label for e in out] == [i % 2 for i in range(30)]
    assert 1 < state.peak <= 4


def test_client_gives_up_after_retries():
    cfg, transport = _client(MockState(fail_first=10), retries=1)
    (ex,) = query_endpoint(cfg, ["p"], transport)
    assert not ex.ok and ex.attempts == 2 and ex.error == "HTTP 503"


def test_client_records_parse_failures():
    cfg, transport = _client(MockState(fixed_reply="maybe"))
    (ex,) = query_endpoint(cfg, ["p"], transport)
    assert not ex.ok and ex.response == "maybe" and "unparseable" in ex.error


def test_mock_requires_bearer():
    async def go():
        async with httpx.AsyncClient(transport=httpx.ASGITransport(app=create_mock_app()), base_url="http://m") as c:
            return await c.post("/v1/chat/completions", json={"model": "m", "messages": [{"role": "user", "content": "x"}]})

    assert asyncio.run(go()).status_code == 401


def test_missing_token(monkeypatch):
    monkeypatch.delenv("DISTRESSBENCH_API_KEY", raising=False)
    with pytest.raises(ConfigError, match="DISTRESSBENCH_API_KEY"):
        ClientConfig("http://x", "m").api_key()
    monkeypatch.setenv("DISTRESSBENCH_API_KEY", "abc")
    assert ClientConfig("http://x", "m").api_key() == "abc"


def test_exchange_log_roundtrip(tmp_path):
    cfg, transport = _client()
    out = query_endpoint(cfg, ["a", "b"], transport)
    write_exchanges(tmp_path / "x.jsonl", out, include_latency=False)
    back = read_exchanges(tmp_path / "x.jsonl")
    assert [r["index"] for r in back] == [0, 1] and "latency" not in back[0] and "prompt" not in back[0]
    assert back[0]["prompt_hash"] == out[0].prompt_hash


# --- probability profile ----------------------------------------------------


def test_profile():
    p = [0.1] * 6 + [0.2] * 3 + [0.9]
    prof = analyze_probability_profile(p, top_k=(1, 2, 3), bins=10)
    assert prof.table == [(0.1, 6), (0.2, 3), (0.9, 1)]
    assert prof.top_mass == {1: 0.6, 2: 0.9, 3: 1.0}
    assert sum(prof.bin_mass) == pytest.approx(1.0)
    assert prof.to_dict()["top_mass"]["3"] == 1.0
    with pytest.raises(ValueError):
        analyze_probability_profile([])
    with pytest.raises(ValueError):
        analyze_probability_profile([1.2])


def test_serialize_frame_rows():
    frame = pd.DataFrame([_features(), _features(X98=1.0)])
    texts = serialize_frame(frame)
    assert len(texts) == 2 and "Insolvency_flag=1.000" in texts[1]
