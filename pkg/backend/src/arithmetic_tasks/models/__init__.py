"""Dataset types."""

from .dataset import ANSWER_POSITION, SEQUENCE_LENGTH, TaskDataset, TaskName, Vocabulary

__all__ = ["ANSWER_POSITION", "SEQUENCE_LENGTH", "TaskDataset", "TaskName", "Vocabulary"]
