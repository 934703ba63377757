"""Exception types shared across the pipeline."""


class DistressBenchError(Exception):
    """Base class for all package errors."""


class SchemaError(DistressBenchError, ValueError):
    """Input columns do not match the declared schema."""


class DataError(DistressBenchError, ValueError):
    """Input data violates an invariant (duplicates, ordering, non-finite values)."""


class ConfigError(DistressBenchError, ValueError):
    """Invalid configuration value."""


class TrainingError(DistressBenchError, ValueError):
    """A model cannot be fitted on the given data."""


class ShapeError(DistressBenchError, ValueError):
    """Array dimensions do not match what was fitted."""


class MetricError(DistressBenchError, ValueError):
    """A metric is undefined for the given inputs (e.g. a single class)."""


class SelectionError(DistressBenchError, ValueError):
    """Not enough rows to select the requested examples."""


class FitError(DistressBenchError, RuntimeError):
    """A leaf or member learner failed while fitting a scaling wrapper."""


class PipelineError(DistressBenchError, RuntimeError):
    """A pipeline stage cannot run (missing upstream artifact, locked output, ...)."""


class SplitError(DistressBenchError, ValueError):
    """A stratified split cannot be formed (e.g. a class has no rows)."""


class TimingError(DistressBenchError, RuntimeError):
    """The scorer failed while being timed."""


class ReportError(DistressBenchError, ValueError):
    """Results cannot be combined into one report."""


class CapacityError(ConfigError):
    """A capacity-limited learner was given more rows than it accepts."""
