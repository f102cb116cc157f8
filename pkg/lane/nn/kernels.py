"""
Backward kernels and their task schedules.

The backward pass of each layer is a 2-D parallel loop over
(o in cols_out, i in cols_input). The runtime splits the outer o range;
each block also computes its own deltas and delta_biases, which stands in
for the i == 0 lane of the 2-D launch. Index (o, i) therefore writes only
gradients[i][o] and delta_weights[i][o], plus deltas[o] and delta_biases[o]
once per o.

Softmax output (softmax + cross-entropy composite derivative):
    deltas[o] = outputs[o] - target[o]

Fully connected tanh:
    deltas[j] = (1 - outputs[j]^2) * sum_k next_deltas[k] * next_weights[j][k]

Both then:
    gradients[i][o]     = deltas[o] * inputs[i]
    delta_weights[i][o] = -eta * gradients[i][o]
    delta_biases[o]     = -eta * deltas[o]

Schedules stream in the per-sample buffers and stream out the four
results; there is one schedule per layer.
"""

import numpy as np

from lane.nn.layers import (
    DenseLayer,
    FullyConnectedLayer,
    LearningRate,
    SoftmaxOutputLayer,
)
from lane.runtime.device import Device
from lane.runtime.kernel import Kernel
from lane.runtime.schedule import TaskSchedule
from lane.tensor.dense import FLOAT, DenseMatrix, DenseVector, ShapeError, matmul_rows


def _mxm(lo: int, hi: int, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> None:
    matmul_rows(lo, hi, a, b, c)


MXM = Kernel(name="mxm", arity=3, extents=lambda a, b, c: c.shape, body=_mxm)


def _write_gradients(
    lo: int,
    hi: int,
    d: np.ndarray,
    inputs: np.ndarray,
    deltas: np.ndarray,
    gradients: np.ndarray,
    delta_weights: np.ndarray,
    delta_biases: np.ndarray,
    eta: float,
) -> None:
    step = FLOAT(-eta)
    deltas[lo:hi] = d
    gradients[:, lo:hi] = inputs[:, np.newaxis] * d
    delta_weights[:, lo:hi] = step * gradients[:, lo:hi]
    delta_biases[lo:hi] = step * d


def _softmax_backward(
    lo: int,
    hi: int,
    outputs: np.ndarray,
    target: np.ndarray,
    inputs: np.ndarray,
    deltas: np.ndarray,
    gradients: np.ndarray,
    delta_weights: np.ndarray,
    delta_biases: np.ndarray,
    cols_out: int,
    cols_input: int,
    eta: float,
) -> None:
    d = outputs[lo:hi] - target[lo:hi]
    _write_gradients(lo, hi, d, inputs, deltas, gradients, delta_weights, delta_biases, eta)


def _fc_backward(
    lo: int,
    hi: int,
    outputs: np.ndarray,
    next_weights: np.ndarray,
    next_deltas: np.ndarray,
    inputs: np.ndarray,
    deltas: np.ndarray,
    gradients: np.ndarray,
    delta_weights: np.ndarray,
    delta_biases: np.ndarray,
    cols_out: int,
    cols_input: int,
    eta: float,
) -> None:
    error = np.zeros(hi - lo, dtype=FLOAT)
    for k in range(next_deltas.shape[0]):
        error += next_deltas[k] * next_weights[lo:hi, k]
    out = outputs[lo:hi]
    d = (FLOAT(1) - out * out) * error
    _write_gradients(lo, hi, d, inputs, deltas, gradients, delta_weights, delta_biases, eta)


SOFTMAX_BACKWARD = Kernel(
    name="softmax_backward",
    arity=10,
    extents=lambda *args: (args[7], args[8]),
    body=_softmax_backward,
)

FC_BACKWARD = Kernel(
    name="fc_backward",
    arity=11,
    extents=lambda *args: (args[8], args[9]),
    body=_fc_backward,
)


def build_softmax_schedule(
    layer: SoftmaxOutputLayer, eta: LearningRate | float, device: Device | None = None
) -> TaskSchedule:
    """Persistent backward schedule of a softmax output layer."""
    return (
        TaskSchedule("SoftmaxOutputLayer", device)
        .stream_in(layer.outputs, layer.target, layer.inputs)
        .task(
            "backward",
            SOFTMAX_BACKWARD,
            layer.outputs,
            layer.target,
            layer.inputs,
            layer.deltas,
            layer.gradients,
            layer.delta_weights,
            layer.delta_biases,
            layer.cols_out,
            layer.cols_input,
            float(eta),
        )
        .stream_out(layer.deltas, layer.gradients, layer.delta_weights, layer.delta_biases)
    )


def build_fc_schedule(
    layer: FullyConnectedLayer,
    next_weights: DenseMatrix,
    next_deltas: DenseVector,
    eta: LearningRate | float,
    device: Device | None = None,
) -> TaskSchedule:
    """Persistent backward schedule of a tanh layer feeding `next_weights`.

    Raises:
        ShapeError: If next_weights / next_deltas do not chain with the layer
    """
    if next_weights.rows != layer.cols_out or next_weights.cols != next_deltas.len:
        raise ShapeError(
            f"next layer {next_weights.rows}x{next_weights.cols} with "
            f"{next_deltas.len} deltas does not follow {layer!r}"
        )
    return (
        TaskSchedule("FullyConnectedLayer", device)
        .stream_in(layer.outputs, next_weights, next_deltas, layer.inputs)
        .task(
            "backward",
            FC_BACKWARD,
            layer.outputs,
            next_weights,
            next_deltas,
            layer.inputs,
            layer.deltas,
            layer.gradients,
            layer.delta_weights,
            layer.delta_biases,
            layer.cols_out,
            layer.cols_input,
            float(eta),
        )
        .stream_out(layer.deltas, layer.gradients, layer.delta_weights, layer.delta_biases)
    )


def build_backward_schedule(
    layer: DenseLayer,
    eta: LearningRate | float,
    device: Device | None = None,
    next_layer: DenseLayer | None = None,
) -> TaskSchedule:
    """Backward schedule for either layer kind.

    Raises:
        ValueError: If a tanh layer is given without the layer it feeds
    """
    if isinstance(layer, SoftmaxOutputLayer):
        return build_softmax_schedule(layer, eta, device)
    if not isinstance(layer, FullyConnectedLayer) or next_layer is None:
        raise ValueError(f"cannot build a backward schedule for {layer!r}")
    return build_fc_schedule(layer, next_layer.weights, next_layer.deltas, eta, device)


def _run_once(schedule: TaskSchedule) -> None:
    schedule.execute()
    if schedule.device is not None:
        schedule.device.evict(schedule.buffers())


def backward_softmax_output(
    layer: SoftmaxOutputLayer,
    target: DenseVector,
    eta: LearningRate | float,
    device: Device | None = None,
) -> None:
    """One backward step of the output layer against a one-hot target.

    Raises:
        ShapeError: If the target length differs from cols_out
    """
    layer.set_target(target)
    _run_once(build_softmax_schedule(layer, eta, device))


def backward_fc(
    layer: FullyConnectedLayer,
    next_weights: DenseMatrix,
    next_deltas: DenseVector,
    eta: LearningRate | float,
    device: Device | None = None,
) -> None:
    """One backward step of a tanh layer given the next layer's weights and deltas.

    Raises:
        ShapeError: If next_weights / next_deltas do not chain with the layer
    """
    _run_once(build_fc_schedule(layer, next_weights, next_deltas, eta, device))
