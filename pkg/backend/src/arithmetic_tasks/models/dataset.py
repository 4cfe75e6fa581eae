"""
Multitask modular-arithmetic datasets.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

import numpy as np

# Sequence layout: [BOS, a, op, b, '='], the answer is read at '='
SEQUENCE_LENGTH = 5
ANSWER_POSITION = 4


class TaskName(str, Enum):
    ADD = "add"
    MUL = "mul"

    @property
    def symbol(self) -> str:
        return "+" if self is TaskName.ADD else "×"

    @classmethod
    def from_symbol(cls, symbol: str) -> "TaskName":
        for task in cls:
            if task.symbol == symbol:
                return task
        raise ValueError(f"Unknown operator symbol '{symbol}'")

    def apply(self, a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
        return (a + b) % modulus if self is TaskName.ADD else (a * b) % modulus


@dataclass(frozen=True)
class Vocabulary:
    """Digits 0..p-1 followed by '+', '×', '=' and BOS."""
    modulus: int

    @property
    def plus(self) -> int:
        return self.modulus

    @property
    def times(self) -> int:
        return self.modulus + 1

    @property
    def equals(self) -> int:
        return self.modulus + 2

    @property
    def bos(self) -> int:
        return self.modulus + 3

    @property
    def size(self) -> int:
        return self.modulus + 4

    def operator(self, task: TaskName) -> int:
        return self.plus if TaskName(task) is TaskName.ADD else self.times

    def token_names(self) -> Dict[int, str]:
        names = {digit: str(digit) for digit in range(self.modulus)}
        names.update({self.plus: "+", self.times: "×", self.equals: "=", self.bos: "<bos>"})
        return names


@dataclass(frozen=True)
class TaskDataset:
    """
    Arithmetic problems with one answer token each.

    Arrays are aligned by example: operands `a`, `b`, task label and answer.
    """
    modulus: int
    a: np.ndarray
    b: np.ndarray
    tasks: np.ndarray
    answers: np.ndarray

    def __len__(self) -> int:
        return int(self.answers.shape[0])

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(self.modulus)

    @property
    def tokens(self) -> np.ndarray:
        """Token rows [n × 5] as int64."""
        vocab = self.vocabulary
        ops = np.where(self.tasks == TaskName.ADD.value, vocab.plus, vocab.times)
        n = len(self)
        return np.stack([
            np.full(n, vocab.bos), self.a, ops, self.b, np.full(n, vocab.equals)
        ], axis=1).astype(np.int64)

    @property
    def answer_positions(self) -> np.ndarray:
        return np.full(len(self), ANSWER_POSITION, dtype=np.int64)

    @property
    def task_names(self) -> List[TaskName]:
        return sorted({TaskName(t) for t in self.tasks}, key=lambda t: t.value)

    def subset(self, rows: np.ndarray) -> "TaskDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return TaskDataset(
            modulus=self.modulus,
            a=self.a[rows],
            b=self.b[rows],
            tasks=self.tasks[rows],
            answers=self.answers[rows],
        )

    def triples(self) -> set:
        """(a, op, b) triples, the identity used for split disjointness."""
        return set(zip(self.a.tolist(), self.tasks.tolist(), self.b.tolist()))
