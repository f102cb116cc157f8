"""
Flat single-precision containers.

DenseMatrix and DenseVector are the only storage form kernels accept. Both
own one contiguous float32 numpy buffer; a matrix stores element (i, j) at
flat index i * cols + j. The buffer object is never replaced after
construction, so a container's identity is a stable key for device arenas.

Equality is identity: two containers holding equal values are still two
distinct buffers as far as a TaskSchedule is concerned. Compare contents
with numpy.testing or `np.array_equal(a.data, b.data)`.
"""

from collections.abc import Sequence

import numpy as np

from lane.tensor.rng import SeededRng

FLOAT = np.float32


class ShapeError(ValueError):
    """Dimensions are missing, zero, or incompatible."""


class RangeError(ValueError):
    """A numeric range argument is empty or inverted."""


class DenseVector:
    """Contiguous float32 vector."""

    __slots__ = ("len", "data")

    def __init__(self, length: int, fill: float = 0.0) -> None:
        if length < 1:
            raise ShapeError(f"vector length must be >= 1, got {length}")
        self.len = length
        self.data = np.full(length, fill, dtype=FLOAT)

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> "DenseVector":
        array = np.asarray(values, dtype=FLOAT).ravel()
        vector = cls(len(array))
        vector.data[:] = array
        return vector

    def __repr__(self) -> str:
        return f"DenseVector(len={self.len})"

    def __len__(self) -> int:
        return self.len

    @property
    def shape(self) -> tuple[int]:
        return (self.len,)

    @property
    def nbytes(self) -> int:
        return self.data.nbytes

    def copy(self) -> "DenseVector":
        return DenseVector.from_values(self.data)

    def argmax(self) -> int:
        """Index of the largest element; ties go to the lowest index."""
        return int(np.argmax(self.data))


class DenseMatrix:
    """Contiguous row-major float32 matrix."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, fill: float = 0.0) -> None:
        if rows < 1 or cols < 1:
            raise ShapeError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = np.full(rows * cols, fill, dtype=FLOAT)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]] | np.ndarray) -> "DenseMatrix":
        array = np.asarray(rows, dtype=FLOAT)
        if array.ndim != 2:
            raise ShapeError(f"expected a 2-D array, got {array.ndim}-D")
        matrix = cls(array.shape[0], array.shape[1])
        matrix.data[:] = array.ravel()
        return matrix

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls.from_rows(np.eye(n, dtype=FLOAT))

    def __repr__(self) -> str:
        return f"DenseMatrix(rows={self.rows}, cols={self.cols})"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nbytes(self) -> int:
        return self.data.nbytes

    @property
    def grid(self) -> np.ndarray:
        """2-D view over the flat buffer (writes go through)."""
        return self.data.reshape(self.rows, self.cols)

    def get(self, i: int, j: int) -> float:
        return float(self.data[i * self.cols + j])

    def set(self, i: int, j: int, value: float) -> None:
        self.data[i * self.cols + j] = value

    def copy(self) -> "DenseMatrix":
        return DenseMatrix.from_rows(self.grid)


Buffer = DenseMatrix | DenseVector


def matrix_new(rows: int, cols: int, fill: float = 0.0) -> DenseMatrix:
    """Matrix of the given shape with every element equal to `fill`."""
    return DenseMatrix(rows, cols, fill)


def matmul_rows(lo: int, hi: int, a: np.ndarray, b: np.ndarray, out: np.ndarray) -> None:
    """Write rows [lo, hi) of a @ b into out.

    Each output element accumulates its products in ascending k, one float32
    rounding per multiply and per add, so the result does not depend on how
    the row range is split.
    """
    acc = np.zeros((hi - lo, b.shape[1]), dtype=FLOAT)
    for k in range(a.shape[1]):
        acc += a[lo:hi, k, np.newaxis] * b[k]
    out[lo:hi] = acc


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Reference matrix product with ascending-k accumulation.

    Raises:
        ShapeError: If a.cols != b.rows
    """
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    result = DenseMatrix(a.rows, b.cols)
    matmul_rows(0, a.rows, a.grid, b.grid, result.grid)
    return result


def _float32_bounds(lo: float, hi: float) -> tuple[np.float32, np.float32]:
    """Tightest float32 interval inside [lo, hi)."""
    low = FLOAT(lo)
    if low < lo:
        low = np.nextafter(low, FLOAT(np.inf))
    high = FLOAT(hi)
    if high >= hi:
        high = np.nextafter(high, FLOAT(-np.inf))
    return low, high


def random_fill(m: Buffer, rng: SeededRng, lo: float, hi: float) -> Buffer:
    """Fill `m` in place with uniform values in [lo, hi), row-major order.

    Values are drawn in float64 and rounded to float32, then clamped so that
    rounding can never reach `hi`.

    Raises:
        RangeError: If lo >= hi
    """
    if not lo < hi:
        raise RangeError(f"empty range [{lo}, {hi})")
    low, high = _float32_bounds(lo, hi)
    values = rng.uniform(lo, hi, m.data.size).astype(FLOAT)
    np.clip(values, low, high, out=values)
    m.data[:] = values
    return m
