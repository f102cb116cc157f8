"""
Layer state and forward passes.

Two layer kinds are supported, both dense:
- FullyConnectedLayer: tanh activation
- SoftmaxOutputLayer: softmax over the logits, paired with cross-entropy loss

Every piece of layer state is a DenseMatrix / DenseVector allocated once at
construction. Forward passes copy their input into `inputs` instead of
rebinding it, so schedules built over a layer's buffers stay valid for the
layer's lifetime.

Forward formulas:
    netin[j]   = sum_i inputs[i] * weights[i][j] + biases[j]   (ascending i)
    tanh:      outputs[j] = tanh(netin[j])
    softmax:   outputs[o] = exp(netin[o] - max netin) / sum_m exp(netin[m] - max netin)
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lane.tensor.dense import (
    FLOAT,
    DenseMatrix,
    DenseVector,
    ShapeError,
    matmul_rows,
    random_fill,
)
from lane.tensor.rng import SeededRng

# Largest float32 below 1; keeps tanh outputs inside the open interval.
_TANH_LIMIT = np.nextafter(FLOAT(1), FLOAT(0))


class LearningRate(BaseModel):
    """Step size passed into the backward kernels."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(gt=0.0)

    def __float__(self) -> float:
        return self.eta


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-shifted softmax of a 1-D float32 array."""
    shifted = logits - logits.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


class DenseLayer:
    """State shared by both layer kinds."""

    activation = "identity"

    def __init__(self, cols_input: int, cols_out: int) -> None:
        if cols_input < 1 or cols_out < 1:
            raise ShapeError(
                f"layer dimensions must be >= 1, got {cols_input}->{cols_out}"
            )
        self.cols_input = cols_input
        self.cols_out = cols_out

        self.weights = DenseMatrix(cols_input, cols_out)
        self.biases = DenseVector(cols_out)
        self.inputs = DenseVector(cols_input)
        self.netin = DenseVector(cols_out)
        self.outputs = DenseVector(cols_out)
        self.deltas = DenseVector(cols_out)
        self.gradients = DenseMatrix(cols_input, cols_out)
        self.delta_weights = DenseMatrix(cols_input, cols_out)
        self.delta_biases = DenseVector(cols_out)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.cols_input}->{self.cols_out}, {self.activation})"

    def init_weights(self, rng: SeededRng) -> None:
        """Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases."""
        bound = 1.0 / math.sqrt(self.cols_input)
        random_fill(self.weights, rng, -bound, bound)
        self.biases.data.fill(0.0)

    def _net_input(self, input: DenseVector) -> None:
        if input.len != self.cols_input:
            raise ShapeError(
                f"{type(self).__name__} expects {self.cols_input} inputs, got {input.len}"
            )
        np.copyto(self.inputs.data, input.data)
        matmul_rows(
            0,
            1,
            self.inputs.data[np.newaxis, :],
            self.weights.grid,
            self.netin.data[np.newaxis, :],
        )
        self.netin.data += self.biases.data

    def forward(self, input: DenseVector) -> DenseVector:
        raise NotImplementedError

    def apply_updates(self) -> None:
        """Add the last backward pass's deltas to weights and biases."""
        self.weights.data += self.delta_weights.data
        self.biases.data += self.delta_biases.data


class FullyConnectedLayer(DenseLayer):
    """Dense layer with tanh activation."""

    activation = "tanh"

    def forward(self, input: DenseVector) -> DenseVector:
        self._net_input(input)
        np.tanh(self.netin.data, out=self.outputs.data)
        np.clip(self.outputs.data, -_TANH_LIMIT, _TANH_LIMIT, out=self.outputs.data)
        return self.outputs


class SoftmaxOutputLayer(DenseLayer):
    """Dense output layer with softmax activation.

    `target` holds the one-hot label of the sample being trained on; the
    backward schedule streams it in alongside the outputs.
    """

    activation = "softmax"

    def __init__(self, cols_input: int, cols_out: int) -> None:
        super().__init__(cols_input, cols_out)
        self.target = DenseVector(cols_out)

    def forward(self, input: DenseVector) -> DenseVector:
        self._net_input(input)
        self.outputs.data[:] = softmax(self.netin.data)
        return self.outputs

    def set_target(self, target: DenseVector) -> None:
        if target.len != self.cols_out:
            raise ShapeError(f"target has {target.len} classes, layer has {self.cols_out}")
        np.copyto(self.target.data, target.data)


def forward_fc(layer: FullyConnectedLayer, input: DenseVector) -> DenseVector:
    """Tanh forward pass; returns the layer's outputs buffer."""
    return layer.forward(input)


def forward_softmax(layer: SoftmaxOutputLayer, input: DenseVector) -> DenseVector:
    """Softmax forward pass; returns the layer's outputs buffer."""
    return layer.forward(input)


def apply_updates(layer: DenseLayer) -> None:
    """weights += delta_weights; biases += delta_biases."""
    layer.apply_updates()
