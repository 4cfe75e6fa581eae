"""
Run configuration for the command-line pipeline.

A RunConfig file (YAML or JSON) holds one section per stage. Command-line
flags override file values, which override defaults.
"""

import copy
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from shared.errors import ConfigurationError
from model_core.config.training_config import BaseTrainingConfig
from model_core.models.data_models import MLPConfig, TransformerConfig
from discovery.config.discovery_config import DiscoveryConfig
from arithmetic_tasks.models.dataset import SEQUENCE_LENGTH

logger = logging.getLogger(__name__)


class Architecture(str, Enum):
    TRANSFORMER = "transformer"
    MLP = "mlp"


class TaskConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    modulus: int = Field(11, ge=2, description="Modulus p of the arithmetic problems")
    split_fraction: float = Field(0.9, gt=0, lt=1, description="Share of problems in the train split")


class LoggingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    level: str = Field("INFO", description="Root log level")
    json_format: bool = Field(False, alias="json", description="Emit JSON log lines")


@dataclass
class Override:
    path: str
    value: Any
    origin: str


def _set_path(document: Dict[str, Any], path: str, value: Any) -> None:
    node = document
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"Cannot override '{path}': '{key}' is not a section")
    node[keys[-1]] = value


def _leaf_paths(document: Dict[str, Any], prefix: str = "") -> List[str]:
    paths = []
    for key, value in document.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict) and value:
            paths.extend(_leaf_paths(value, f"{path}."))
        else:
            paths.append(path)
    return paths


class RunConfig(BaseModel):
    """All stages of one pipeline run; unknown keys are rejected."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    architecture: Architecture = Field(Architecture.TRANSFORMER, description="Base model family")
    model: TransformerConfig = Field(default_factory=TransformerConfig, description="Transformer shape")
    mlp: MLPConfig = Field(default_factory=MLPConfig, description="MLP shape (architecture: mlp)")
    task: TaskConfig = Field(default_factory=TaskConfig, description="Arithmetic dataset")
    base_training: BaseTrainingConfig = Field(default_factory=BaseTrainingConfig, description="Base model training")
    discovery: DiscoveryConfig = Field(default_factory=DiscoveryConfig, description="Mask discovery")
    logging: LoggingConfig = Field(default_factory=LoggingConfig, description="Log output")
    seed: int = Field(0, description="Root seed of every named random stream")

    _raw: Dict[str, Any] = PrivateAttr(default_factory=dict)
    _flag_paths: List[str] = PrivateAttr(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _vocab_from_modulus(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = copy.deepcopy(data)
        task = data.get("task") or {}
        modulus = task.get("modulus", 11) if isinstance(task, dict) else 11
        for section in ("model", "mlp"):
            block = data.setdefault(section, {})
            if isinstance(block, dict):
                block.setdefault("vocab_size", modulus + 4)
        return data

    @model_validator(mode="after")
    def _check_shapes(self) -> "RunConfig":
        needed = self.task.modulus + 4
        if self.model.vocab_size < needed or self.mlp.vocab_size < needed:
            raise ValueError(f"vocab_size must be at least modulus + 4 = {needed}")
        if self.model.max_seq_len < SEQUENCE_LENGTH:
            raise ValueError(f"model.max_seq_len must be >= {SEQUENCE_LENGTH}")
        if self.mlp.seq_len != SEQUENCE_LENGTH:
            raise ValueError(f"mlp.seq_len must be {SEQUENCE_LENGTH}")
        return self

    @classmethod
    def from_dict(cls, document: Optional[Dict[str, Any]]) -> "RunConfig":
        document = copy.deepcopy(document or {})
        config = cls.model_validate(document)
        config._raw = document
        return config

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """Read a YAML or JSON run configuration."""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Cannot parse run configuration {path}: {e}")
        if document is not None and not isinstance(document, dict):
            raise ConfigurationError(f"Run configuration {path} must be a mapping")
        logger.info(f"Loaded run configuration from {path}")
        return cls.from_dict(document)

    def with_overrides(self, flags: Dict[str, Any]) -> "RunConfig":
        """New config with non-None flag values (dotted paths) applied over the file values."""
        document = copy.deepcopy(self._raw)
        applied = []
        for path, value in flags.items():
            if value is None:
                continue
            _set_path(document, path, value.value if isinstance(value, Enum) else value)
            applied.append(path)
        config = RunConfig.model_validate(document)
        config._raw = document
        config._flag_paths = applied
        return config

    def overrides(self) -> List[Override]:
        """Every non-default field with its origin (flag or file)."""
        effective = self.model_dump(mode="json", by_alias=True)
        result = []
        for path in _leaf_paths(self._raw):
            origin = "flag" if path in self._flag_paths else "file"
            node: Any = effective
            for key in path.split("."):
                node = node.get(key) if isinstance(node, dict) else None
            result.append(Override(path, node, origin))
        return result

    def log_overrides(self) -> None:
        overrides = self.overrides()
        if not overrides:
            logger.info("Run configuration: all defaults")
        for item in overrides:
            logger.info(f"Config {item.path} = {item.value!r} (from {item.origin})")

    def describe(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)
