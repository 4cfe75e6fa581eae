"""Discovery result types."""

from .results import CURVE_COLUMNS, DiscoveryResult, EpochRecord, EvalResult, SweepResult

__all__ = ["CURVE_COLUMNS", "DiscoveryResult", "EpochRecord", "EvalResult", "SweepResult"]
