from __future__ import annotations

import pytest

from distressbench.data import CompanyYearRecord, RawStatement
from distressbench.errors import ConfigError
from distressbench.labeling import DistressRule, build_horizon_dataset, detect_distress, distress_years

from oracles import LABELING_EXPECTED, horizon_oracle, labeling_panel


def _last(eq, eb, ca, cl=1.0, ta=1.0, year=2019):
    s = RawStatement(total_assets=ta, equity=eq, ebitda=eb, current_assets=ca, current_liabilities=cl)
    return [CompanyYearRecord("c", "PL", year, statement=s)]


def test_detect_distress_examples():
    assert detect_distress(_last(-0.1, -0.05, 0.5)).distressed
    assert detect_distress(_last(-0.1, -0.05, 0.5)).distress_year == 2019
    assert not detect_distress(_last(-0.1, -0.05, 0.6)).distressed
    assert not detect_distress(_last(-0.1, -0.05, 0.5, year=2021)).distressed


def test_missing_or_zero_denominator_is_not_a_breach():
    assert not detect_distress(_last(-0.1, -0.05, 0.5, cl=None)).distressed
    assert not detect_distress(_last(-0.1, -0.05, 0.5, cl=0.0)).distressed
    assert not detect_distress(_last(-0.1, -0.05, 0.5, ta=0.0)).distressed
    assert not detect_distress(_last(None, -0.05, 0.5)).distressed


def test_detect_distress_empty_history():
    with pytest.raises(ValueError):
        detect_distress([])


def test_only_last_record_counts():
    panel = labeling_panel()
    assert "G" not in distress_years(panel).index


@pytest.mark.parametrize("h", range(5))
def test_handcrafted_panel_positive_sets(h):
    ds = build_horizon_dataset(labeling_panel(), h)
    pos = ds.rows[ds.rows["label"] == 1]
    assert set(zip(pos["company_id"], pos["report_year"])) == LABELING_EXPECTED[h]


@pytest.mark.parametrize("h", range(5))
def test_rows_match_brute_force(h):
    panel = labeling_panel()
    ds = build_horizon_dataset(panel, h)
    positives, kept = horizon_oracle(panel, h)
    assert set(zip(ds.rows["company_id"], ds.rows["report_year"])) == kept
    pos = ds.rows[ds.rows["label"] == 1]
    assert set(zip(pos["company_id"], pos["report_year"])) == positives


def test_fully_truncated_company_is_removed():
    ds = build_horizon_dataset(labeling_panel(), 2)
    assert "K" not in set(ds.rows["company_id"])
    assert "D" not in set(ds.rows["company_id"])


def test_panel_row_points_at_source_record():
    panel = labeling_panel()
    ds = build_horizon_dataset(panel, 1)
    src = panel.frame.iloc[ds.rows["panel_row"].to_numpy()]
    assert list(src["company_id"]) == list(ds.rows["company_id"])
    assert list(src["report_year"]) == list(ds.rows["report_year"])


def test_monotone_positive_counts():
    panel = labeling_panel()
    counts = [build_horizon_dataset(panel, h).class_counts[0] for h in range(5)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_manifest_and_export(tmp_path):
    ds = build_horizon_dataset(labeling_panel(), 0)
    m = ds.manifest()
    assert m["n_positive"] == 5 and m["total"] == m["n_positive"] + m["n_negative"]
    path = ds.export(tmp_path / "h0.csv")
    assert path.exists() and (tmp_path / "h0.csv").read_text().startswith("company_id,report_year,label")


def test_negative_horizon_rejected():
    with pytest.raises(ConfigError):
        build_horizon_dataset(labeling_panel(), -1)


def test_configurable_thresholds():
    panel = labeling_panel()
    loose = DistressRule(current_ratio_max=0.61)  # B's 0.6 now counts
    assert "B" in distress_years(panel, loose).index
    with pytest.raises(ConfigError):
        DistressRule(current_ratio_max=float("nan"))


def test_synthetic_counts_match_brute_force():
    from distressbench.data import SynthConfig, generate_synthetic_panel

    panel = generate_synthetic_panel(SynthConfig(n_companies=300, target_distress_rate=0.05, seed=3))
    for h in (0, 2, 4):
        ds = build_horizon_dataset(panel, h)
        positives, kept = horizon_oracle(panel, h)
        assert ds.class_counts[0] == len(positives)
        assert len(ds) == len(kept)
