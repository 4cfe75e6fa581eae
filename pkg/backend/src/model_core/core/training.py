"""
Base training: Adam over every weight on the answer-position cross-entropy.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Protocol

import numpy as np

from shared.errors import NonFiniteLossError
from tensor_engine import Adam
from tensor_engine.core import functional as F
from ..config.training_config import BaseTrainingConfig
from .base import Model

logger = logging.getLogger(__name__)


class SupervisedData(Protocol):
    """Anything exposing token rows, answer positions and answer tokens."""
    tokens: np.ndarray
    answer_positions: np.ndarray
    answers: np.ndarray


@dataclass
class TrainingReport:
    epochs_run: int
    final_loss: float
    converged: bool
    losses: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "final_loss": self.final_loss,
            "converged": self.converged,
        }


def iterate_batches(n: int, batch_size, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Index batches for one epoch; full batch keeps the natural order."""
    if batch_size is None or batch_size >= n:
        yield np.arange(n)
        return
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def answer_loss(model: Model, data: SupervisedData, rows: np.ndarray):
    logits = model.answer_logits(data.tokens[rows], data.answer_positions[rows])
    return F.softmax_cross_entropy(logits, data.answers[rows])


def train_base(model: Model, data: SupervisedData, config: BaseTrainingConfig,
               rng: np.random.Generator) -> TrainingReport:
    """
    Train all weights of `model` in place.

    Stops early once the epoch loss reaches config.convergence_loss. On a
    non-finite loss the weights that last produced a finite loss are restored
    and NonFiniteLossError is raised.
    """
    model.unfreeze()
    optimizer = Adam(model.parameters(), lr=config.learning_rate)
    n = len(data.answers)
    losses: List[float] = []
    converged = False
    epoch = 0
    last_good = model.weight_snapshot()

    logger.info(f"Training base model on {n} examples for up to {config.epochs} epochs")

    for epoch in range(1, config.epochs + 1):
        batch_losses = []
        for step, rows in enumerate(iterate_batches(n, config.batch_size, rng)):
            current = model.weight_snapshot()
            optimizer.zero_grad()
            loss = answer_loss(model, data, rows)
            value = loss.item()
            if not np.isfinite(value):
                model.restore(last_good)
                model.freeze()
                raise NonFiniteLossError(
                    "Non-finite base training loss; last good weights restored",
                    {"epoch": epoch, "step": step, "loss": value},
                )
            last_good = current
            loss.backward()
            optimizer.step()
            batch_losses.append(value * len(rows))

        epoch_loss = float(np.sum(batch_losses) / n)
        losses.append(epoch_loss)

        if epoch % config.log_every == 0:
            logger.info(f"Epoch {epoch}: train loss {epoch_loss:.6f}")

        if epoch_loss <= config.convergence_loss:
            converged = True
            logger.info(f"Converged at epoch {epoch} (loss {epoch_loss:.6f})")
            break

    model.freeze()
    return TrainingReport(epochs_run=epoch, final_loss=losses[-1], converged=converged, losses=losses)
