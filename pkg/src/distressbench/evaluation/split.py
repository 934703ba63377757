"""Deterministic stratified splitting and subsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SplitError


@dataclass(frozen=True)
class SplitPlan:
    test_size: int = 20_000
    validation_fraction: float = 0.2
    seed: int = 42

    @property
    def stratified(self) -> bool:
        return True


@dataclass(frozen=True)
class Split:
    """Row positions (sorted) of each partition."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


def proportional_counts(class_sizes: np.ndarray, total: int) -> np.ndarray:
    """Split ``total`` across classes proportionally to ``class_sizes`` (largest remainder)."""
    class_sizes = np.asarray(class_sizes, dtype=np.int64)
    exact = total * class_sizes / class_sizes.sum()
    counts = np.floor(exact).astype(np.int64)
    short = total - counts.sum()
    if short:
        # ties in the remainder go to the smaller class index
        order = np.lexsort((np.arange(len(exact)), -(exact - counts)))
        counts[order[:short]] += 1
    return np.minimum(counts, class_sizes)


def _class_members(labels: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        if idx.size == 0:
            raise SplitError(f"class {cls} has no rows")
        out.append(rng.permutation(idx))
    return out


def stratified_subsample(labels, size: int, seed: int) -> np.ndarray:
    """Positions of a class-proportional subsample of ``size`` rows (all rows if fewer)."""
    labels = np.asarray(labels)
    if size >= labels.size:
        return np.arange(labels.size)
    rng = np.random.default_rng(seed)
    members = _class_members(labels, rng)
    counts = proportional_counts(np.array([m.size for m in members]), size)
    return np.sort(np.concatenate([m[:c] for m, c in zip(members, counts)]))


def stratified_split(labels, plan: SplitPlan) -> Split:
    """Test subset of ``plan.test_size`` rows, then train/validation from the remainder.

    Accepts a label array or anything with a ``labels`` attribute (e.g. a
    :class:`~distressbench.labeling.HorizonDataset`).
    """
    labels = np.asarray(getattr(labels, "labels", labels))
    if plan.test_size >= labels.size:
        raise ConfigError(f"test_size {plan.test_size} must be below the row count {labels.size}")
    if not 0.0 < plan.validation_fraction < 1.0:
        raise ConfigError("validation_fraction must be in (0, 1)")
    rng = np.random.default_rng(plan.seed)
    members = _class_members(labels, rng)
    sizes = np.array([m.size for m in members])
    n_test = proportional_counts(sizes, plan.test_size)
    rest = sizes - n_test
    n_val = proportional_counts(rest, int(round(plan.validation_fraction * rest.sum())))
    test, val, train = [], [], []
    for m, t, v in zip(members, n_test, n_val):
        test.append(m[:t])
        val.append(m[t : t + v])
        train.append(m[t + v :])
    return Split(*(np.sort(np.concatenate(parts)) for parts in (train, val, test)))
