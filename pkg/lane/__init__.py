"""
lane - task-schedule runtime for neural-network backward kernels

A feed-forward network trainer whose backpropagation kernels run as task
schedules on pluggable serial and data-parallel host devices, with explicit
copy-in / copy-out semantics and a benchmark harness that times each phase.

This package provides:
- Dense float32 tensors and a seeded random source
- Task runtime: kernels, devices, schedules and reductions
- Fully connected and softmax output layers with backward kernels
- Backpropagation training and the benchmark harness
- CLI for benchmarking, sweeps and training runs
"""

__version__ = "0.1.0"

from lane.config.defaults import DEFAULT_SEED

__all__ = [
    "__version__",
    "DEFAULT_SEED",
]
