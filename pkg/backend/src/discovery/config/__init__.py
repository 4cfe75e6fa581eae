"""Discovery configuration."""

from .discovery_config import DiscoveryConfig

__all__ = ["DiscoveryConfig"]
