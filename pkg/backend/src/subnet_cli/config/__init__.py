"""Run configuration."""

from .run_config import Architecture, LoggingConfig, Override, RunConfig, TaskConfig

__all__ = ["Architecture", "LoggingConfig", "Override", "RunConfig", "TaskConfig"]
