"""
Minibatch Adam training against the sample-mean squared-error loss.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from nn.autodiff import Tensor, mse
from nn.layers import NetworkConfigError
from nn.optim import Adam
from utils.errors import NumericalFailure

logger = logging.getLogger(__name__)


class TrainingFault(NumericalFailure):
    """Raised when a parameter receives a non-finite gradient."""

    def __init__(self, parameter: str, epoch: int):
        self.parameter = parameter
        self.epoch = epoch
        super().__init__(f"Non-finite gradient in {parameter} at epoch {epoch}")


class TrainingDivergenceError(NumericalFailure):
    """Raised when the training loss becomes non-finite."""
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 16
    epochs: int = 100
    val_fraction: float = 0.1
    log_every: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise NetworkConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise NetworkConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise NetworkConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise NetworkConfigError(f"val_fraction must be in [0, 1), got {self.val_fraction}")
        if self.log_every < 1:
            raise NetworkConfigError(f"log_every must be >= 1, got {self.log_every}")


@dataclass
class TrainingHistory:
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    train_groups: Tuple[int, ...] = ()
    val_groups: Tuple[int, ...] = ()

    @property
    def final_train_loss(self) -> float:
        return self.train_loss[-1] if self.train_loss else math.nan

    @property
    def final_val_loss(self) -> float:
        return self.val_loss[-1] if self.val_loss else math.nan


def split_by_group(groups: np.ndarray, val_fraction: float,
                   rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hold out whole groups (training parameters) for validation.

    With fewer than two groups, or val_fraction 0, everything trains.
    """
    groups = np.asarray(groups)
    unique = np.unique(groups)
    if unique.size < 2 or val_fraction <= 0:
        return np.arange(groups.size), np.arange(0)
    n_val = min(unique.size - 1, max(1, int(round(val_fraction * unique.size))))
    val_groups = rng.permutation(unique)[:n_val]
    is_val = np.isin(groups, val_groups)
    return np.nonzero(~is_val)[0], np.nonzero(is_val)[0]


def evaluate_loss(forward: Callable[[Tensor], Tensor], inputs: np.ndarray,
                  targets: np.ndarray, batch_size: int) -> float:
    """Sample-mean squared error over a dataset, evaluated batch by batch."""
    if inputs.shape[0] == 0:
        return math.nan
    total = 0.0
    for start in range(0, inputs.shape[0], batch_size):
        x = inputs[start:start + batch_size]
        y = targets[start:start + batch_size]
        total += float(mse(forward(Tensor(x)), y).data) * x.shape[0]
    return total / inputs.shape[0]


def train_network(forward: Callable[[Tensor], Tensor], parameters: Sequence[Tensor],
                  inputs: np.ndarray, targets: np.ndarray, config: TrainConfig,
                  groups: Optional[np.ndarray] = None, label: str = 'network') -> TrainingHistory:
    """
    Fit parameters with Adam on minibatches.

    Args:
        forward: Network forward pass on a batch Tensor
        parameters: Trainable tensors
        inputs: (samples, ...) inputs
        targets: (samples, ...) targets
        config: Optimizer and schedule settings
        groups: Per-sample group id for the validation split (defaults to one per sample)
        label: Name used in logs and errors

    Returns:
        TrainingHistory with per-epoch train and validation losses

    Raises:
        TrainingDivergenceError: If a batch loss is non-finite
        TrainingFault: If a gradient is non-finite
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if inputs.shape[0] != targets.shape[0]:
        raise NetworkConfigError(f"{label}: {inputs.shape[0]} inputs vs {targets.shape[0]} targets")
    if inputs.shape[0] == 0:
        raise NetworkConfigError(f"{label}: empty training set")

    rng = np.random.default_rng(config.seed)
    if groups is None:
        groups = np.arange(inputs.shape[0])
    train_idx, val_idx = split_by_group(groups, config.val_fraction, rng)

    optimizer = Adam(parameters, lr=config.learning_rate)
    history = TrainingHistory(
        train_groups=tuple(int(g) for g in np.unique(np.asarray(groups)[train_idx])),
        val_groups=tuple(int(g) for g in np.unique(np.asarray(groups)[val_idx])),
    )

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        total = 0.0
        for start in range(0, order.size, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss = mse(forward(Tensor(inputs[batch])), targets[batch])
            value = float(loss.data)
            if not math.isfinite(value):
                raise TrainingDivergenceError(f"{label}: loss became {value} at epoch {epoch}")

            optimizer.zero_grad()
            loss.backward()
            for p in parameters:
                if p.grad is not None and not np.all(np.isfinite(p.grad)):
                    raise TrainingFault(p.name or 'unnamed', epoch)
            optimizer.step()
            total += value * batch.size

        history.train_loss.append(total / order.size)
        history.val_loss.append(evaluate_loss(forward, inputs[val_idx], targets[val_idx],
                                              config.batch_size))
        if epoch % config.log_every == 0 or epoch == config.epochs:
            logger.info(f"{label} epoch {epoch}/{config.epochs}: "
                        f"train {history.train_loss[-1]:.4e} val {history.val_loss[-1]:.4e}")

    return history
