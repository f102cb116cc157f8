"""
Parallel reductions.

On serial-host the whole range is folded in one pass. On parallel-host each
worker folds a contiguous block from the identity and the partial results
are combined once, in block order, at the end. Results can differ from the
serial fold only by reassociation of the combine operator.
"""

from typing import Any

import numpy as np

from lane.runtime.device import Device
from lane.runtime.kernel import KernelError, ReduceKernel


def parallel_reduce(kernel: ReduceKernel, extent: int, device: Device) -> Any:
    """Fold kernel.element over [0, extent) with kernel.combine on `device`.

    Raises:
        KernelError: If extent is negative
    """
    if extent < 0:
        raise KernelError(f"reduction extent must be >= 0, got {extent}")
    return device.reduce(kernel, extent)


def sum_of(values: np.ndarray) -> ReduceKernel:
    """Sum reduction over the elements of a 1-D array."""
    return ReduceKernel(element=lambda idx: values[idx], combine=np.add, identity=0.0)


def max_of(values: np.ndarray) -> ReduceKernel:
    """Max reduction over the elements of a 1-D array."""
    return ReduceKernel(
        element=lambda idx: values[idx], combine=np.maximum, identity=-np.inf
    )
