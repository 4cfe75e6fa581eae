"""
Discovery
Mask optimization over frozen models, the magnitude baseline, subnetwork
probing and Full/Subnet/Complement evaluation.
"""

from .config.discovery_config import DiscoveryConfig
from .core.evaluator import EvalMode, apply_subnetwork, evaluate
from .core.probe import ProbeHead
from .core.trainer import baseline_discover, discover, lambda_sweep, probe_discover
from .models.results import DiscoveryResult, EpochRecord, EvalResult, SweepResult

__version__ = "1.0.0"
__all__ = [
    "DiscoveryConfig", "EvalMode", "apply_subnetwork", "evaluate", "ProbeHead",
    "baseline_discover", "discover", "lambda_sweep", "probe_discover",
    "DiscoveryResult", "EpochRecord", "EvalResult", "SweepResult",
]
