"""
Feed-forward network assembly.

A network is an input width, zero or more tanh hidden layers, and one
softmax output layer, with each layer's fan-in equal to the previous
layer's width.
"""

import hashlib
from collections.abc import Sequence
from dataclasses import dataclass, field

from lane.nn.kernels import build_backward_schedule
from lane.nn.layers import DenseLayer, FullyConnectedLayer, LearningRate, SoftmaxOutputLayer
from lane.runtime.device import Device
from lane.runtime.schedule import TaskSchedule
from lane.tensor.dense import DenseVector
from lane.tensor.rng import SeededRng


class NetworkError(ValueError):
    """Network sizes are invalid or layers do not chain."""


@dataclass
class FeedForwardNetwork:
    """Chained tanh hidden layers ending in a softmax output layer."""

    input_width: int
    hidden: list[FullyConnectedLayer] = field(default_factory=list)
    output: SoftmaxOutputLayer = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.output is None:
            raise NetworkError("a network needs an output layer")
        width = self.input_width
        for layer in self.layers:
            if layer.cols_input != width:
                raise NetworkError(
                    f"{layer!r} expects {layer.cols_input} inputs but follows width {width}"
                )
            width = layer.cols_out

    @property
    def layers(self) -> list[DenseLayer]:
        return [*self.hidden, self.output]

    @property
    def class_count(self) -> int:
        return self.output.cols_out

    @property
    def parameter_count(self) -> int:
        return sum(layer.weights.data.size + layer.biases.len for layer in self.layers)

    def forward(self, x: DenseVector) -> DenseVector:
        """Feed x through every layer; returns the output layer's buffer."""
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def predict(self, x: DenseVector) -> int:
        """Class index with the highest probability (lowest index on ties)."""
        return self.forward(x).argmax()

    def apply_updates(self) -> None:
        for layer in self.layers:
            layer.apply_updates()

    def backward_schedules(
        self, eta: LearningRate | float, device: Device | None = None
    ) -> list[TaskSchedule]:
        """One persistent backward schedule per layer, output layer first."""
        schedules = [build_backward_schedule(self.output, eta, device)]
        next_layer: DenseLayer = self.output
        for layer in reversed(self.hidden):
            schedules.append(build_backward_schedule(layer, eta, device, next_layer))
            next_layer = layer
        return schedules

    def state_digest(self) -> str:
        """sha256 over every weight and bias buffer, in layer order."""
        digest = hashlib.sha256()
        for layer in self.layers:
            digest.update(layer.weights.data.tobytes())
            digest.update(layer.biases.data.tobytes())
        return digest.hexdigest()


def build_network(
    input_width: int,
    hidden_sizes: Sequence[int],
    classes: int,
    rng: SeededRng,
) -> FeedForwardNetwork:
    """Create a network with uniformly initialized weights and zero biases.

    Layers draw their weights from `rng` in order, input side first.

    Raises:
        NetworkError: If input_width < 1, classes < 2, or a hidden size < 1
    """
    if input_width < 1:
        raise NetworkError(f"input width must be >= 1, got {input_width}")
    if classes < 2:
        raise NetworkError(f"need at least 2 classes, got {classes}")
    if any(size < 1 for size in hidden_sizes):
        raise NetworkError(f"hidden sizes must be >= 1, got {list(hidden_sizes)}")

    hidden = []
    width = input_width
    for size in hidden_sizes:
        layer = FullyConnectedLayer(width, size)
        layer.init_weights(rng)
        hidden.append(layer)
        width = size
    output = SoftmaxOutputLayer(width, classes)
    output.init_weights(rng)
    return FeedForwardNetwork(input_width=input_width, hidden=hidden, output=output)
