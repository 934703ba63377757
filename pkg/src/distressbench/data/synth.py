"""Seeded synthetic panel generator.

Stands in for the proprietary company-year data. Each company gets a latent
size profile and three liquidity/solvency/profitability stress signals.
Healthy companies are often stressed on one or two of the three distress
criteria and sometimes on all three in a non-final year, which the
last-record rule labels negative. Distressed companies breach all three
abruptly in their final year after several years of stagnant assets and
revenue, while other companies' yearly changes are large and of random sign.
Only a symmetric band around zero growth separates the two, which trees find
and linear scorers cannot. A second group ends in the censor year with the
same signature, so the censoring rule has something to exclude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import ndtri

from ..errors import ConfigError
from .records import MacroTable, Panel

_COUNTRIES = np.array(["CZ", "HU", "PL", "SK"])
_COUNTRY_WEIGHTS = np.array([0.052, 0.324, 0.568, 0.056])
_REGIONS = {
    "CZ": ["Praha", "Jihomoravsky", "Moravskoslezsky", "Stredocesky"],
    "HU": ["Budapest", "Bacs-Kiskun", "Pest", "Gyor-Moson-Sopron", "Hajdu-Bihar"],
    "PL": ["Mazowieckie", "Lodzkie", "Podlaskie", "Malopolskie", "Slaskie", "Pomorskie"],
    "SK": ["Bratislavsky", "Kosicky", "Zilinsky"],
}
_LEGAL_FORMS = np.array(
    ["Limited Liability Company", "Limited Liability Partnership", "Joint Stock Company", "Sole Proprietorship"]
)
_LEGAL_WEIGHTS = np.array([0.62, 0.18, 0.12, 0.08])
_EMPLOYEE_BANDS = np.array(
    ["1-9 employees", "10-49 employees", "50-249 employees", "250-999 employees", "1000+ employees"]
)
_STATUSES = np.array(["Active", "Inactive", "Liquidation", "Under Legal Investigation", "Closed"])
_STATUS_WEIGHTS = np.array([0.85, 0.05, 0.04, 0.02, 0.04])
_SECTOR_CODES = np.array([11, 21, 23, 31, 42, 44, 48, 51, 53, 54, 56, 62, 72, 81])
_SECTOR_WEIGHTS = np.array([0.04, 0.01, 0.12, 0.16, 0.14, 0.12, 0.07, 0.05, 0.05, 0.09, 0.04, 0.04, 0.04, 0.03])
_SERVICE_SECTORS = {51, 53, 54, 56, 62, 81}
_BASE_GDP = {"CZ": 2.3e8, "HU": 1.5e8, "PL": 5.0e8, "SK": 1.0e8}


@dataclass(frozen=True)
class SynthConfig:
    n_companies: int = 1000
    year_span: tuple[int, int] = (2006, 2021)
    target_distress_rate: float = 0.004
    seed: int = 42
    censored_rate: float | None = None  # defaults to target_distress_rate
    censor_year: int = 2021
    stress_prob: float = 0.4
    near_miss_prob: float = 0.7
    temporary_breach_prob: float = 0.3
    stagnation_prob: float = 0.2
    missing_rate: float = 0.02

    def validate(self) -> None:
        if self.n_companies < 1:
            raise ConfigError("n_companies must be >= 1")
        if not 0.0 <= self.target_distress_rate <= 1.0:
            raise ConfigError(f"target_distress_rate must be in [0, 1], got {self.target_distress_rate}")
        cens = self.censored_rate
        if cens is not None and not 0.0 <= cens <= 1.0:
            raise ConfigError(f"censored_rate must be in [0, 1], got {cens}")
        y0, y1 = self.year_span
        if y1 < y0:
            raise ConfigError(f"empty year span {self.year_span}")
        if not 0.0 < self.stress_prob < 0.5:
            raise ConfigError("stress_prob must be in (0, 0.5)")
        if not 0.0 <= self.near_miss_prob <= 1.0:
            raise ConfigError("near_miss_prob must be in [0, 1]")
        if not 0.0 <= self.temporary_breach_prob < 1.0:
            raise ConfigError("temporary_breach_prob must be in [0, 1)")
        if not 0.0 <= self.stagnation_prob <= 1.0:
            raise ConfigError("stagnation_prob must be in [0, 1]")
        if not 0.0 <= self.missing_rate < 0.5:
            raise ConfigError("missing_rate must be in [0, 0.5)")


def synthetic_macro_table(years: tuple[int, int] = (2006, 2021), seed: int = 42) -> MacroTable:
    """GDP per V4 country and year: a base level with ~3% growth and small shocks."""
    rng = np.random.default_rng([seed, 7])
    table = {}
    for country in _COUNTRIES:
        level = _BASE_GDP[str(country)]
        for year in range(years[0], years[1] + 1):
            table[(str(country), year)] = level
            level *= 1.0 + 0.03 + 0.015 * rng.standard_normal()
    return MacroTable(table)


def _pick(rng: np.random.Generator, values: np.ndarray, weights: np.ndarray | None, size: int) -> np.ndarray:
    p = None if weights is None else weights / weights.sum()
    return values[rng.choice(len(values), size=size, p=p)]


def generate_synthetic_panel(config: SynthConfig) -> Panel:
    """Generate a panel that is a pure function of ``config`` (seed included)."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_companies
    y0, y1 = config.year_span
    span_len = y1 - y0 + 1
    censor = config.censor_year
    distress_end_max = min(y1, censor - 1)
    censored_rate = config.target_distress_rate if config.censored_rate is None else config.censored_rate

    n_dist = int(round(config.target_distress_rate * n)) if distress_end_max >= y0 else 0
    n_cens = int(round(censored_rate * n)) if y0 <= censor <= y1 else 0
    n_cens = min(n_cens, n - n_dist)
    kind = np.zeros(n, dtype=np.int8)  # 0 healthy, 1 distressed, 2 censored distress signature
    order = rng.permutation(n)
    kind[order[:n_dist]] = 1
    kind[order[n_dist : n_dist + n_cens]] = 2

    # history extent
    length = 1 + rng.binomial(span_len - 1, 0.3, size=n)
    end = np.where(rng.random(n) < 0.45, y1, rng.integers(y0, y1 + 1, size=n))
    if n_dist:
        end[kind == 1] = rng.integers(y0, distress_end_max + 1, size=int((kind == 1).sum()))
    end[kind == 2] = censor
    start = np.maximum(y0, end - length + 1)
    length = end - start + 1

    # company attributes
    country = _pick(rng, _COUNTRIES, _COUNTRY_WEIGHTS, n)
    region = np.array([_REGIONS[c][rng.integers(len(_REGIONS[c]))] for c in country], dtype=object)
    legal = _pick(rng, _LEGAL_FORMS, _LEGAL_WEIGHTS, n)
    employees = _pick(rng, _EMPLOYEE_BANDS, np.array([0.5, 0.3, 0.14, 0.05, 0.01]), n)
    status = _pick(rng, _STATUSES, _STATUS_WEIGHTS, n)
    naics2 = _pick(rng, _SECTOR_CODES, _SECTOR_WEIGHTS, n)
    naics3 = naics2 * 10 + rng.integers(1, 10, size=n)
    naics_primary = naics3 * 100 + rng.integers(0, 100, size=n)
    multi = (rng.random(n) < 0.2).astype(float)
    naics_secondary = np.where(
        multi == 1.0, _pick(rng, _SECTOR_CODES, None, n) * 1000 + rng.integers(100, 1000, size=n), 0
    )
    incorporation = start - rng.integers(0, 31, size=n)

    sector_ebitda = {int(c): 0.02 * rng.standard_normal() for c in _SECTOR_CODES}
    sector_turnover = {int(c): float(np.exp(0.3 * rng.standard_normal())) for c in _SECTOR_CODES}
    year_ebitda = {y: 0.005 * rng.standard_normal() for y in range(y0, y1 + 1)}
    for shock_year, shock in ((2009, -0.02), (2020, -0.015)):
        if shock_year in year_ebitda:
            year_ebitda[shock_year] += shock

    log_size = rng.normal(7.5, 1.6, size=n)
    latent = rng.standard_normal((n, 3))
    decline = rng.integers(3, 7, size=n)
    no_inventory = np.isin(naics2, list(_SERVICE_SECTORS)) & (rng.random(n) < 0.7)
    turnover_c = np.array([sector_turnover[int(c)] for c in naics2]) * np.exp(rng.normal(0.1, 0.4, size=n))
    ebitda_c = np.array([sector_ebitda[int(c)] for c in naics2])

    # expand to rows
    c = np.repeat(np.arange(n), length)
    m = len(c)
    t = np.arange(m) - np.repeat(np.cumsum(length) - length, length)
    year = start[c] + t
    k = end[c] - year
    row_kind = kind[c]

    z = 0.85 * latent[c] + 0.53 * rng.standard_normal((m, 3))
    stress = z > ndtri(1.0 - config.stress_prob)
    triple = stress.all(axis=1)
    weakest = np.argmin(z, axis=1)
    stress[triple, weakest[triple]] = False
    # most double-stressed rows sit just on the healthy side of the remaining criterion
    near_miss = (stress.sum(axis=1) == 2) & (rng.random(m) < config.near_miss_prob)
    # healthy companies also go through full breaches they later recover from
    temporary = (row_kind == 0) & (k >= 1) & (rng.random(m) < config.temporary_breach_prob)
    stress[temporary] = True
    near_miss &= ~temporary

    eq_ok = 0.05 + 0.75 * rng.beta(2, 3, size=m)
    eb_ok = np.maximum(
        0.005,
        0.02 + 0.3 * rng.beta(2, 4, size=m) + ebitda_c[c] + np.array([year_ebitda[y] for y in year]),
    )
    cr_ok = np.maximum(0.65, np.exp(rng.normal(np.log(1.6), 0.45, size=m)))
    eq_ok = np.where(near_miss, rng.uniform(0.002, 0.04, size=m), eq_ok)
    eb_ok = np.where(near_miss, rng.uniform(0.001, 0.012, size=m), eb_ok)
    cr_ok = np.where(near_miss, rng.uniform(0.601, 0.7, size=m), cr_ok)
    eq_bad = -np.exp(rng.normal(np.log(0.6), 0.6, size=m))
    eb_bad = -np.exp(rng.normal(np.log(0.15), 0.6, size=m))
    cr_bad = 0.02 + 0.3 * rng.beta(2, 2, size=m)
    eq = np.where(stress[:, 0], eq_bad, eq_ok)
    eb = np.where(stress[:, 1], eb_bad, eb_ok)
    cr = np.where(stress[:, 2], cr_bad, cr_ok)

    # Terminal trajectories cover a company's last few years. Their ratios follow
    # the same process as everyone else's until the final year, which is a full
    # breach drawn from the same severe-stress distributions as a temporary one.
    declining = (row_kind > 0) & (k < decline[c])
    final_sig = (row_kind > 0) & (k == 0)
    eq[final_sig] = eq_bad[final_sig]
    eb[final_sig] = eb_bad[final_sig]
    cr[final_sig] = cr_bad[final_sig]

    # Assets and revenue follow log random walks with random-sign steps. Terminal
    # trajectories stagnate (small moves), temporary breaches swing hard, other
    # rows mostly move a lot and sometimes stagnate. The signal sits in a band
    # around zero growth, which no single linear weight can pick out.
    first = t == 0
    calm = declining | (~temporary & (rng.random(m) < config.stagnation_prob))

    def steps(scale: float) -> np.ndarray:
        size = np.where(calm, rng.uniform(0.0, 0.02, size=m), 0.05 + np.abs(rng.normal(0.0, scale, size=m)))
        return np.where(first, 0.0, rng.choice([-1.0, 1.0], size=m) * size)

    asset_step = steps(0.08)
    revenue_step = steps(0.1)
    row_start = np.repeat(np.cumsum(length) - length, length)

    def walk(steps: np.ndarray) -> np.ndarray:
        total = np.cumsum(steps)
        return total - total[row_start] + steps[row_start]

    # ratios -> statement
    ta = np.exp(log_size[c] + walk(asset_step))
    equity = eq * ta
    tl = ta - equity
    ca_share = np.minimum(0.15 + 0.6 * rng.beta(2, 2, size=m), 0.97 * cr * tl / ta)
    ca = ca_share * ta
    fa = ta - ca
    cl = ca / cr
    ltl = tl - cl
    inv_share = np.where(no_inventory[c], 0.0, 0.05 + 0.3 * rng.beta(2, 3, size=m))
    rec_share = 0.1 + 0.35 * rng.beta(2, 3, size=m)
    scale = np.minimum(1.0, 0.9 / (inv_share + rec_share))
    inventories = ca * inv_share * scale
    receivables = ca * rec_share * scale
    cash = ca - inventories - receivables
    share_capital = ta * (0.02 + 0.15 * rng.beta(1, 3, size=m))
    revenue = np.exp(log_size[c] + walk(revenue_step)) * turnover_c[c]
    ebitda = eb * ta
    depreciation = fa * (0.04 + 0.08 * rng.beta(2, 2, size=m))
    ebit = ebitda - depreciation
    financial_costs = np.maximum(ltl, 0.0) * rng.uniform(0.03, 0.08, size=m) + 0.01 * cl
    pretax = ebit - financial_costs
    net_profit = np.where(pretax > 0, 0.81 * pretax, pretax)
    gross_profit = revenue * (0.15 + 0.35 * rng.beta(2, 2, size=m))
    operating_expenses = np.maximum(revenue - ebitda, 0.0)
    total_costs = np.maximum(revenue - ebit, 0.01 * revenue)

    frame = pd.DataFrame(
        {
            "company_id": np.array([f"C{i:07d}" for i in range(n)], dtype=object)[c],
            "country": country[c].astype(object),
            "state_region": region[c],
            "legal_form": legal[c].astype(object),
            "employees_band": employees[c].astype(object),
            "operational_status": status[c].astype(object),
            "naics_primary": naics_primary[c].astype(float),
            "naics_secondary": naics_secondary[c].astype(float),
            "naics_2digit": naics2[c].astype(float),
            "naics_3digit": naics3[c].astype(float),
            "has_multiple_industries": multi[c],
            "incorporation_year": incorporation[c].astype(float),
            "report_year": year.astype(np.int64),
            "total_assets": ta,
            "fixed_assets": fa,
            "current_assets": ca,
            "inventories": inventories,
            "receivables": receivables,
            "cash": cash,
            "quick_assets": ca - inventories,
            "equity": equity,
            "share_capital": share_capital,
            "retained_profit": equity - share_capital,
            "total_liabilities": tl,
            "current_liabilities": cl,
            "long_term_liabilities": ltl,
            "total_operating_revenue": revenue,
            "sales": revenue.copy(),
            "gross_profit": gross_profit,
            "net_profit": net_profit,
            "ebit": ebit,
            "ebitda": ebitda,
            "depreciation": depreciation,
            "financial_costs": financial_costs,
            "interest_expense": 0.85 * financial_costs,
            "operating_expenses": operating_expenses,
            "total_costs": total_costs,
            "cash_flow": net_profit + depreciation,
        }
    )

    if config.missing_rate > 0:
        rule_fields = ("total_assets", "equity", "ebitda", "current_assets", "current_liabilities")
        for name in frame.columns[13:]:
            holes = rng.random(m) < config.missing_rate
            if name in rule_fields:
                # rule inputs go missing only on healthy companies, and rarely
                holes &= (row_kind == 0) & (rng.random(m) < 0.25)
            frame.loc[holes, name] = np.nan

    return Panel(frame, macro=synthetic_macro_table((y0, y1), config.seed))
