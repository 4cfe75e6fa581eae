"""
Subnet CLI
Command-line pipeline over the toolkit: train-base, discover, eval, stats, viz,
plus the multitask experiment driver.
"""

from .config.run_config import Architecture, RunConfig
from .main import build_parser, cmd_discover, cmd_eval, cmd_stats, cmd_train_base, cmd_viz, main
from .experiment import ExperimentReport, log_verdict, run_experiment

__version__ = "1.0.0"
__all__ = [
    "Architecture", "RunConfig", "build_parser", "main",
    "cmd_train_base", "cmd_discover", "cmd_eval", "cmd_stats", "cmd_viz",
    "ExperimentReport", "run_experiment", "log_verdict",
]
