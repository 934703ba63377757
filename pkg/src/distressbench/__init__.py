"""Benchmark pipeline for multi-horizon corporate distress prediction on imbalanced panels."""

__version__ = "0.1.0"
