"""
CSV dump and load of train/test splits (columns: a, op, b, answer, split).
"""

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from shared.errors import ConfigurationError
from ..models.dataset import TaskDataset, TaskName

logger = logging.getLogger(__name__)

COLUMNS = ["a", "op", "b", "answer", "split"]


def to_frame(data: TaskDataset, split: str) -> pd.DataFrame:
    return pd.DataFrame({
        "a": data.a,
        "op": [TaskName(t).symbol for t in data.tasks],
        "b": data.b,
        "answer": data.answers,
        "split": split,
    }, columns=COLUMNS)


def dump_dataset(train: TaskDataset, test: TaskDataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.concat([to_frame(train, "train"), to_frame(test, "test")], ignore_index=True)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} problems to {path}")
    return path


def _from_frame(frame: pd.DataFrame, modulus: int) -> TaskDataset:
    return TaskDataset(
        modulus=modulus,
        a=frame["a"].to_numpy(dtype=np.int64),
        b=frame["b"].to_numpy(dtype=np.int64),
        tasks=np.array([TaskName.from_symbol(s).value for s in frame["op"]]),
        answers=frame["answer"].to_numpy(dtype=np.int64),
    )


def load_dataset(path: Union[str, Path], modulus: int) -> Tuple[TaskDataset, TaskDataset]:
    """Read a dump back; the modulus is not stored in the CSV."""
    frame = pd.read_csv(path, dtype={"op": str, "split": str})
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigurationError(f"Dataset CSV {path} is missing columns {missing}")
    return (_from_frame(frame[frame["split"] == "train"], modulus),
            _from_frame(frame[frame["split"] == "test"], modulus))
