"""Distribution of self-reported probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProbabilityProfile:
    n: int
    distinct: int
    table: list[tuple[float, int]]  # (value, count), most frequent first, then by value
    top_mass: dict[int, float]
    bin_edges: list[float]
    bin_mass: list[float]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "distinct": self.distinct,
            "table": [[v, c] for v, c in self.table],
            "top_mass": {str(k): v for k, v in self.top_mass.items()},
            "histogram": {"edges": self.bin_edges, "mass": self.bin_mass},
        }


def analyze_probability_profile(probabilities, top_k=(1, 2, 3, 4, 5, 10), bins: int = 20) -> ProbabilityProfile:
    p = np.asarray(probabilities, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("no probabilities to profile")
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    values, counts = np.unique(p, return_counts=True)
    order = np.lexsort((values, -counts))
    table = [(float(values[i]), int(counts[i])) for i in order]
    sorted_counts = counts[order]
    top = {int(k): float(sorted_counts[:k].sum() / p.size) for k in top_k}
    edges = np.linspace(0.0, 1.0, bins + 1)
    hist, _ = np.histogram(p, bins=edges)
    return ProbabilityProfile(
        n=int(p.size),
        distinct=int(values.size),
        table=table,
        top_mass=top,
        bin_edges=[float(e) for e in edges],
        bin_mass=[float(h / p.size) for h in hist],
    )
