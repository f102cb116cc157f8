"""Cross-entropy loss against one-hot targets."""

import numpy as np

from lane.config import defaults
from lane.tensor.dense import DenseVector, ShapeError


def cross_entropy(predicted: DenseVector, target: DenseVector) -> float:
    """-sum_o target[o] * ln(max(predicted[o], 1e-12)), evaluated in float64.

    Raises:
        ShapeError: If the vectors differ in length
    """
    if predicted.len != target.len:
        raise ShapeError(
            f"prediction has {predicted.len} classes, target has {target.len}"
        )
    clamped = np.maximum(predicted.data.astype(np.float64), defaults.LOG_CLAMP)
    return float(-np.dot(target.data.astype(np.float64), np.log(clamped)))
