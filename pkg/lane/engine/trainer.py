"""
Backpropagation trainer.

Each epoch visits the training samples in a shuffled order derived from the
run seed and the epoch number. Per sample:
    1. feed forward through every layer
    2. cross-entropy loss against the one-hot label
    3. backward schedules, output layer first, on the trainer's device
    4. weight and bias updates for every layer

All backward steps of a sample see the pre-update weights; updates are
applied only after the first hidden layer's backward schedule has run.
Training stops after the first epoch whose mean loss is at or below
max_error, or after max_epochs.
"""

import logging
import math
from dataclasses import dataclass

from lane.config.schema import TrainerConfig
from lane.engine.loss import cross_entropy
from lane.engine.network import FeedForwardNetwork
from lane.io.dataset import DataItem, DataSet
from lane.runtime.device import Device, SerialHost
from lane.runtime.schedule import TaskSchedule
from lane.tensor.rng import SeededRng

logger = logging.getLogger(__name__)


class TrainingError(Exception):
    """Training cannot start with the given data."""


class EvaluationError(TrainingError):
    """Evaluation cannot run with the given data."""


@dataclass
class EpochStats:
    """Mean loss and accuracy over one pass (epoch 0 for evaluation)."""

    epoch: int
    mean_loss: float
    accuracy: float


def _check_shapes(net: FeedForwardNetwork, data: DataSet, error: type[Exception]) -> None:
    if data.feature_width != net.input_width or data.class_count != net.class_count:
        raise error(
            f"dataset is {data.feature_width}->{data.class_count}, "
            f"network is {net.input_width}->{net.class_count}"
        )


def backpropagate(
    net: FeedForwardNetwork, item: DataItem, schedules: list[TaskSchedule]
) -> tuple[float, bool]:
    """Forward, loss and backward for one sample, without applying updates.

    Returns:
        (cross-entropy loss, whether the pre-update prediction was correct)
    """
    outputs = net.forward(item.features)
    loss = cross_entropy(outputs, item.label)
    correct = outputs.argmax() == item.label.argmax()
    net.output.set_target(item.label)
    for schedule in schedules:
        schedule.execute()
    return loss, correct


class BackpropagationTrainer:
    """Online SGD over a FeedForwardNetwork with backward kernels on a device.

    Usage:
        trainer = BackpropagationTrainer(TrainerConfig(eta=0.1), device)
        history = trainer.train(net, train_set)
    """

    def __init__(
        self, config: TrainerConfig | None = None, device: Device | None = None
    ) -> None:
        self.config = config or TrainerConfig()
        self.device = device or SerialHost()

    def step(
        self, net: FeedForwardNetwork, item: DataItem, schedules: list[TaskSchedule]
    ) -> tuple[float, bool]:
        """One online training step on a single sample."""
        loss, correct = backpropagate(net, item, schedules)
        net.apply_updates()
        return loss, correct

    def train(self, net: FeedForwardNetwork, train_set: DataSet) -> list[EpochStats]:
        """Train until the loss threshold or the epoch limit.

        Raises:
            TrainingError: If the set is empty or its widths differ from the network's
        """
        if len(train_set) == 0:
            raise TrainingError("training set is empty")
        _check_shapes(net, train_set, TrainingError)

        schedules = net.backward_schedules(self.config.eta, self.device)
        shuffles = SeededRng(self.config.seed)
        history: list[EpochStats] = []
        n = len(train_set)
        logger.info(
            "training %d samples on %s (eta=%g, max_epochs=%d, max_error=%g)",
            n,
            self.device.label,
            self.config.eta,
            self.config.max_epochs,
            self.config.max_error,
        )

        try:
            for epoch in range(1, self.config.max_epochs + 1):
                losses = []
                hits = 0
                for index in shuffles.derive(epoch).permutation(n):
                    loss, correct = self.step(net, train_set[int(index)], schedules)
                    losses.append(loss)
                    hits += correct
                stats = EpochStats(epoch, math.fsum(losses) / n, hits / n)
                history.append(stats)
                logger.debug(
                    "epoch %d: mean_loss=%.6f accuracy=%.4f",
                    epoch,
                    stats.mean_loss,
                    stats.accuracy,
                )
                if stats.mean_loss <= self.config.max_error:
                    break
        finally:
            for schedule in schedules:
                self.device.evict(schedule.buffers())

        last = history[-1]
        logger.info(
            "stopped after %d epochs: mean_loss=%.6f accuracy=%.4f",
            last.epoch,
            last.mean_loss,
            last.accuracy,
        )
        return history


def train(
    net: FeedForwardNetwork,
    train_set: DataSet,
    config: TrainerConfig | None = None,
    device: Device | None = None,
) -> list[EpochStats]:
    """Train `net` in place; returns per-epoch statistics."""
    return BackpropagationTrainer(config, device).train(net, train_set)


def evaluate(net: FeedForwardNetwork, test_set: DataSet) -> EpochStats:
    """Accuracy (argmax match) and mean cross-entropy over a test set.

    Raises:
        EvaluationError: If the set is empty or its widths differ from the network's
    """
    if len(test_set) == 0:
        raise EvaluationError("evaluation set is empty")
    _check_shapes(net, test_set, EvaluationError)

    losses = []
    hits = 0
    for item in test_set:
        outputs = net.forward(item.features)
        losses.append(cross_entropy(outputs, item.label))
        hits += outputs.argmax() == item.label.argmax()
    return EpochStats(0, math.fsum(losses) / len(test_set), hits / len(test_set))
