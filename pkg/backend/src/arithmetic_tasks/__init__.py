"""
Arithmetic Tasks
Multitask modular addition and multiplication problems over single-token operands.
"""

from .models.dataset import ANSWER_POSITION, SEQUENCE_LENGTH, TaskDataset, TaskName, Vocabulary
from .core.generator import enumerate_problems, filter_task, generate
from .storage.csv_io import dump_dataset, load_dataset

__version__ = "1.0.0"
__all__ = [
    "ANSWER_POSITION", "SEQUENCE_LENGTH", "TaskDataset", "TaskName", "Vocabulary",
    "enumerate_problems", "filter_task", "generate", "dump_dataset", "load_dataset",
]
