"""
Tensor core for lane.

This module provides:
- DenseMatrix / DenseVector flat float32 containers
- Reference matrix multiply with ascending-k accumulation
- Seeded uniform fill over a PCG64 stream
"""

from lane.tensor.dense import (
    FLOAT,
    Buffer,
    DenseMatrix,
    DenseVector,
    RangeError,
    ShapeError,
    matmul,
    matmul_rows,
    matrix_new,
    random_fill,
)
from lane.tensor.rng import SeededRng

__all__ = [
    "FLOAT",
    "Buffer",
    "DenseMatrix",
    "DenseVector",
    "RangeError",
    "SeededRng",
    "ShapeError",
    "matmul",
    "matmul_rows",
    "matrix_new",
    "random_fill",
]
