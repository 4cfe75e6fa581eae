"""
Logging configuration for scripts and the CLI.
"""

import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def setup_logging(level: str = "INFO", json_format: bool = False,
                  stream: Optional[object] = None) -> None:
    """Configure the root logger, plain text or JSON lines."""
    handler = logging.StreamHandler(stream or sys.stderr)
    if json_format:
        handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(LOG_FORMAT))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        handlers=[handler],
        force=True
    )

    logger.debug(f"Logging configured: level={level}, json={json_format}")
