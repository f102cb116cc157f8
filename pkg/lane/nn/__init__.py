"""
Neural-network layers for lane.

This module provides:
- FullyConnectedLayer (tanh) and SoftmaxOutputLayer state and forward passes
- Backward kernels written against the task-runtime kernel contract
- Per-layer backward schedules and one-shot backward operations
"""

from lane.nn.kernels import (
    FC_BACKWARD,
    MXM,
    SOFTMAX_BACKWARD,
    backward_fc,
    backward_softmax_output,
    build_backward_schedule,
    build_fc_schedule,
    build_softmax_schedule,
)
from lane.nn.layers import (
    DenseLayer,
    FullyConnectedLayer,
    LearningRate,
    SoftmaxOutputLayer,
    apply_updates,
    forward_fc,
    forward_softmax,
    softmax,
)

__all__ = [
    # Kernels
    "FC_BACKWARD",
    "MXM",
    "SOFTMAX_BACKWARD",
    "backward_fc",
    "backward_softmax_output",
    "build_backward_schedule",
    "build_fc_schedule",
    "build_softmax_schedule",
    # Layers
    "DenseLayer",
    "FullyConnectedLayer",
    "LearningRate",
    "SoftmaxOutputLayer",
    "apply_updates",
    "forward_fc",
    "forward_softmax",
    "softmax",
]
