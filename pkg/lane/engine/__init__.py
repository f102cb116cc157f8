"""
lane training and benchmark engine.

This module contains:
- Feed-forward network assembly
- Cross-entropy loss
- Backpropagation trainer and evaluation
- Backward-kernel benchmark harness
"""

from lane.engine.benchmark import (
    BenchmarkError,
    BenchReport,
    BenchRow,
    emit_report,
    emit_sweep,
    load_bench_data,
    run_benchmark,
    run_sweep,
    self_test,
)
from lane.engine.loss import cross_entropy
from lane.engine.network import FeedForwardNetwork, NetworkError, build_network
from lane.engine.trainer import (
    BackpropagationTrainer,
    EpochStats,
    EvaluationError,
    TrainingError,
    backpropagate,
    evaluate,
    train,
)

__all__ = [
    # Network
    "FeedForwardNetwork",
    "NetworkError",
    "build_network",
    # Loss
    "cross_entropy",
    # Training
    "BackpropagationTrainer",
    "EpochStats",
    "EvaluationError",
    "TrainingError",
    "backpropagate",
    "evaluate",
    "train",
    # Benchmark
    "BenchmarkError",
    "BenchReport",
    "BenchRow",
    "emit_report",
    "emit_sweep",
    "load_bench_data",
    "run_benchmark",
    "run_sweep",
    "self_test",
]
