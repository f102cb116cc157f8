"""
Kernel descriptors for the task runtime.

A Kernel is an ahead-of-time implementation of a parallel loop nest. Its
iteration space has one or two parallel dimensions whose extents are read
from the launch arguments. The body is called with a contiguous block
[lo, hi) of the outermost dimension and must cover every inner index of that
block itself, keeping each element's accumulation order sequential.

Kernel contract:
    - purity: for fixed inputs, what a block writes depends only on lo/hi
    - disjoint writes: two distinct outer indices never write the same element

The runtime does not enforce the contract. Devices in debug mode sample it
with `check_disjoint_writes`.
"""

import functools
import itertools
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np


class KernelError(Exception):
    """A kernel was launched with an unusable iteration space."""


class DisjointWriteError(KernelError):
    """Two outer indices of one launch wrote the same element."""

    def __init__(self, kernel: str, first: int, second: int, arg_index: int) -> None:
        self.kernel = kernel
        self.first = first
        self.second = second
        self.arg_index = arg_index
        super().__init__(
            f"kernel '{kernel}': outer indices {first} and {second} "
            f"both write argument {arg_index}"
        )


@dataclass(frozen=True)
class Kernel:
    """A parallel loop nest with a fixed parameter list."""

    name: str
    arity: int
    extents: Callable[..., tuple[int, ...]]
    body: Callable[..., None]

    def space(self, args: tuple[Any, ...]) -> tuple[int, ...]:
        """Iteration extents for one launch.

        Raises:
            KernelError: If the space is not 1-D or 2-D, or has a negative extent
        """
        extents = tuple(int(e) for e in self.extents(*args))
        if len(extents) not in (1, 2):
            raise KernelError(
                f"kernel '{self.name}' declares {len(extents)} parallel dimensions"
            )
        if any(e < 0 for e in extents):
            raise KernelError(f"kernel '{self.name}' has negative extent {extents}")
        return extents


@dataclass(frozen=True)
class ReduceKernel:
    """Reduction of an element function with an associative, commutative combine.

    `element` is vectorized: it maps an index array to the values at those
    indices. `combine` may be a numpy ufunc (folded with `ufunc.reduce`) or
    any binary callable (folded left to right).
    """

    element: Callable[[np.ndarray], np.ndarray]
    combine: Callable[[Any, Any], Any]
    identity: float

    def fold(self, lo: int, hi: int) -> Any:
        """Fold indices [lo, hi) starting from the identity."""
        if hi <= lo:
            return self.identity
        values = self.element(np.arange(lo, hi))
        if isinstance(self.combine, np.ufunc):
            return self.combine.reduce(values, initial=self.identity)
        return functools.reduce(self.combine, values, self.identity)

    def merge(self, partials: list[Any]) -> Any:
        """Combine per-worker partial results in worker order."""
        return functools.reduce(self.combine, partials, self.identity)


def check_disjoint_writes(kernel: Kernel, args: tuple[Any, ...], samples: int) -> None:
    """Run sampled outer indices on scratch copies and compare their write sets.

    Only elements whose bits change are seen, so a write of an unchanged
    value goes unnoticed.

    Raises:
        DisjointWriteError: If two sampled indices change the same element
    """
    outer = kernel.space(args)[0]
    if outer < 2 or samples < 2:
        return
    picks = np.unique(np.linspace(0, outer - 1, num=min(samples, outer)).astype(int))
    arrays = [i for i, arg in enumerate(args) if isinstance(arg, np.ndarray)]

    write_sets: dict[int, dict[int, np.ndarray]] = {}
    for index in picks:
        scratch = [arg.copy() if isinstance(arg, np.ndarray) else arg for arg in args]
        kernel.body(int(index), int(index) + 1, *scratch)
        write_sets[int(index)] = {
            i: scratch[i].view(np.uint32) != args[i].view(np.uint32) for i in arrays
        }

    for first, second in itertools.combinations(write_sets, 2):
        for i in arrays:
            if np.any(write_sets[first][i] & write_sets[second][i]):
                raise DisjointWriteError(kernel.name, first, second, i)
