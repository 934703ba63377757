from .metrics import ConfusionMetrics, calibrate_threshold, confusion_metrics, f1_scan, roc_auc
from .report import METRIC_HEADER, EvalReport, ModelResult, build_report, evaluate_scores, horizon_summary_csv
from .split import Split, SplitPlan, proportional_counts, stratified_split, stratified_subsample
from .timing import TimingReport, default_hardware_note, time_inference

__all__ = [
    "METRIC_HEADER",
    "ConfusionMetrics",
    "EvalReport",
    "ModelResult",
    "Split",
    "SplitPlan",
    "TimingReport",
    "build_report",
    "calibrate_threshold",
    "confusion_metrics",
    "default_hardware_note",
    "evaluate_scores",
    "f1_scan",
    "proportional_counts",
    "roc_auc",
    "stratified_split",
    "stratified_subsample",
    "horizon_summary_csv",
    "time_inference",
]
