"""
Enumerate and split the multitask modular-arithmetic problems.
"""

import logging
from typing import Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from shared.errors import ConfigurationError
from ..models.dataset import TaskDataset, TaskName

logger = logging.getLogger(__name__)


def enumerate_problems(modulus: int) -> TaskDataset:
    """All p² operand pairs for each task, addition first."""
    if modulus < 2:
        raise ConfigurationError(f"modulus must be >= 2, got {modulus}")
    a, b = np.meshgrid(np.arange(modulus), np.arange(modulus), indexing="ij")
    a, b = a.ravel(), b.ravel()

    parts = []
    for task in TaskName:
        parts.append((a, b, np.full(a.size, task.value), task.apply(a, b, modulus)))

    return TaskDataset(
        modulus=modulus,
        a=np.concatenate([p[0] for p in parts]).astype(np.int64),
        b=np.concatenate([p[1] for p in parts]).astype(np.int64),
        tasks=np.concatenate([p[2] for p in parts]),
        answers=np.concatenate([p[3] for p in parts]).astype(np.int64),
    )


def generate(modulus: int, seed: int, split_fraction: float) -> Tuple[TaskDataset, TaskDataset]:
    """
    Shuffle all 2·p² problems with `seed` and split them into train and test,
    stratified by task so both splits hold the same share of each operation.

    Every (a, op, b) triple occurs exactly once, so the split is disjoint.
    """
    if not 0.0 < split_fraction < 1.0:
        raise ConfigurationError(f"split_fraction must lie in (0, 1), got {split_fraction}")

    full = enumerate_problems(modulus)
    try:
        train_rows, test_rows = train_test_split(
            np.arange(len(full)),
            train_size=split_fraction,
            random_state=int(seed) % (2 ** 32),
            shuffle=True,
            stratify=full.tasks,
        )
    except ValueError as e:
        raise ConfigurationError(f"Cannot split {len(full)} problems at {split_fraction}: {e}")
    train, test = full.subset(train_rows), full.subset(test_rows)

    logger.info(f"Generated {len(full)} problems mod {modulus}: {len(train)} train / {len(test)} test")
    return train, test


def filter_task(data: TaskDataset, task: TaskName) -> TaskDataset:
    """Keep only examples of one task; modulus and vocabulary are unchanged."""
    return data.subset(np.flatnonzero(data.tasks == TaskName(task).value))
