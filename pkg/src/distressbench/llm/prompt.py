"""Prompt template, rendering, and hard-example selection for in-context runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import SelectionError

MODES = ("zero_shot", "icl")
EXAMPLES_HEADER = "**Examples**:"
TARGET_HEADER = "**Now analyze this company**:"
TARGET_CUE = "Prediction:"

DEFAULT_HORIZON_TEXT = {
    0: "Estimate whether the company is in financial distress in the reported year itself.",
    1: "Estimate whether the company will be in financial distress one year after the reported year.",
    2: "Estimate whether the company will be in financial distress two years after the reported year.",
    3: "Estimate whether the company will be in financial distress three years after the reported year.",
    4: "Estimate whether the company will be in financial distress four years after the reported year.",
}

DEFAULT_SECTIONS = (
    "You assess the credit risk of small and medium-sized companies from their annual "
    "financial statements. Each company below is described by groups of key=value pairs.",
    "**Reading the ratios**:\n"
    "- Liquidity: can short-term obligations be met from current assets and cash.\n"
    "- Profitability: EBIT, EBITDA and net profit scaled by assets, revenue or equity.\n"
    "- Leverage: how much of the balance sheet is funded by debt.\n"
    "- Efficiency: turnover and day-count measures of the operating cycle.\n"
    "- Growth: year-on-year relative change.\n"
    "- Structure: asset mix, size and company age bands.",
    "**Warning signs**:\n"
    "- Current_ratio below 1 or negative working capital.\n"
    "- Negative equity, negative EBITDA or a net loss.\n"
    "- Debt/total_assets close to or above 1.\n"
    "- Insolvency_flag=1.000 means liabilities exceed assets; Loss_flag=1.000 means a net loss.",
    "**Interpretation**: bankruptcies are rare, so flag a company only when several signs agree.",
)

RESPONSE_FORMAT = (
    "**Response Format**: answer with two numbers separated by a comma, in the form "
    "prediction,probability\n"
    "- prediction is 1 if the company is likely to become distressed and 0 otherwise\n"
    "- probability is the distress probability, a decimal between 0.0 and 1.0\n"
    'For example "0,0.12" or "1,0.80". Do not add any other text.'
)


@dataclass(frozen=True)
class PromptTemplate:
    horizon_text: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_HORIZON_TEXT))
    sections: tuple[str, ...] = DEFAULT_SECTIONS
    response_format: str = RESPONSE_FORMAT


@dataclass(frozen=True)
class ICLExample:
    row: int
    text: str
    label: int


@dataclass(frozen=True)
class ICLExampleSet:
    positives: tuple[ICLExample, ...]
    negatives: tuple[ICLExample, ...]

    @property
    def k(self) -> int:
        return len(self.positives)

    @property
    def rows(self) -> list[int]:
        return [e.row for e in self.positives] + [e.row for e in self.negatives]

    def ordered(self) -> list[ICLExample]:
        """Positives and negatives interleaved, starting with a negative."""
        out = []
        for neg, pos in zip(self.negatives, self.positives):
            out.extend((neg, pos))
        return out


def select_hard_examples(scores, labels, k: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Positions of the k lowest-scored positives and the k highest-scored negatives.

    Equal scores are broken by lower position first.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if pos.size < k or neg.size < k:
        raise SelectionError(f"need {k} rows per class, have {pos.size} positives and {neg.size} negatives")
    pos_pick = pos[np.lexsort((pos, scores[pos]))[:k]]
    neg_pick = neg[np.lexsort((neg, -scores[neg]))[:k]]
    return pos_pick, neg_pick


def select_icl_examples(proxy, X_validation, y_validation, texts: Sequence[str], k: int = 10, rows=None) -> ICLExampleSet:
    """Hard examples from the validation split, scored by a proxy model trained on train.

    ``texts`` are the serialized validation rows; ``rows`` optionally maps
    positions to global row ids (defaults to positions).
    """
    scores = proxy.predict_proba(X_validation)
    pos_pick, neg_pick = select_hard_examples(scores, y_validation, k)
    ids = np.arange(len(texts)) if rows is None else np.asarray(rows)
    return ICLExampleSet(
        tuple(ICLExample(int(ids[i]), texts[i], 1) for i in pos_pick),
        tuple(ICLExample(int(ids[i]), texts[i], 0) for i in neg_pick),
    )


def render_prompt(
    template: PromptTemplate,
    target: str,
    mode: str,
    horizon: int,
    examples: ICLExampleSet | None = None,
) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "icl" and (examples is None or not examples.positives):
        raise ValueError("icl mode requires an example set")
    if horizon not in template.horizon_text:
        raise ValueError(f"template has no guidance for horizon {horizon}")
    parts = [template.sections[0], "**Task**: " + template.horizon_text[horizon], *template.sections[1:]]
    parts.append(template.response_format)
    if mode == "icl":
        blocks = [EXAMPLES_HEADER]
        for i, ex in enumerate(examples.ordered(), start=1):
            blocks.append(f"Example {i}:\n{ex.text}\n{TARGET_CUE} {ex.label}")
        parts.append("\n\n".join(blocks))
    parts.append(f"{TARGET_HEADER}\n{target}\n{TARGET_CUE}")
    return "\n\n".join(parts)
