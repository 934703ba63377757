"""Inference timing harness (warmup + repeated wall-clock runs)."""

from __future__ import annotations

import os
import platform
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Any, Callable

from ..errors import TimingError


@dataclass(frozen=True)
class TimingReport:
    batch_size: int
    run_times: tuple[float, ...]
    mean: float
    std: float
    throughput: float
    hardware_note: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["run_times"] = list(self.run_times)
        return d

    def row(self, model: str) -> dict:
        return {
            "Model": model,
            "Hardware": self.hardware_note,
            "Batch": self.batch_size,
            "Time (s)": f"{self.mean:.3f}±{self.std:.3f}",
            "Throughput (samples/s)": f"{self.throughput:,.2f}",
        }


def default_hardware_note() -> str:
    return f"CPU ({platform.machine() or 'unknown'}, {os.cpu_count() or 1} threads)"


def time_inference(
    score: Callable[[Any], Any],
    batch,
    runs: int = 5,
    warmup: int = 1,
    hardware_note: str | None = None,
) -> TimingReport:
    """Time ``score(batch)``: ``warmup`` discarded calls, then ``runs`` timed ones.

    Reports the mean, the sample (n-1) standard deviation and
    throughput = batch size / mean. The caller must not share the scorer with
    other work while it is being timed.
    """
    batch_size = len(batch)
    if batch_size == 0:
        raise ValueError("batch must be non-empty")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    try:
        for _ in range(warmup):
            score(batch)
        times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            score(batch)
            times.append(time.perf_counter() - t0)
    except Exception as exc:
        raise TimingError(f"scorer failed during timing: {exc}") from exc
    mean = statistics.fmean(times)
    std = statistics.stdev(times) if runs > 1 else 0.0
    return TimingReport(batch_size, tuple(times), mean, std, batch_size / mean, hardware_note or default_hardware_note())
