"""
Execution devices for the task runtime.

Every device owns a private arena: a map from host buffer identity to a
device-side deep copy. Data moves between host and arena only through
`copy_in` / `copy_out`, so transfer cost is real and measurable even though
both backends run on the host CPU.

Backends:
    serial-host    one thread, the whole outer range in a single block
    parallel-host  fixed thread pool, the outer range split into contiguous
                   near-equal blocks, one per worker

numpy releases the GIL inside its array loops, so worker threads run kernel
blocks concurrently.
"""

import logging
import time
from abc import ABC, abstractmethod
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass
from types import TracebackType
from typing import Any

import numpy as np

from lane.config import defaults
from lane.config.schema import DeviceKind, RuntimeConfig
from lane.runtime.kernel import Kernel, ReduceKernel, check_disjoint_writes
from lane.tensor.dense import Buffer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransferModel:
    """Emulated host<->device link.

    Each copy additionally costs `latency + bytes / bandwidth` of wall time,
    spent busy-waiting so it shows up in the copy phases like a DMA would.
    """

    latency_us: float = 0.0
    bandwidth_gbps: float | None = None

    @property
    def enabled(self) -> bool:
        return self.latency_us > 0 or self.bandwidth_gbps is not None

    def cost_ns(self, nbytes: int) -> int:
        cost = self.latency_us * 1e3
        if self.bandwidth_gbps is not None:
            cost += nbytes / self.bandwidth_gbps
        return int(cost)

    def pay(self, nbytes: int) -> None:
        if not self.enabled:
            return
        deadline = time.perf_counter_ns() + self.cost_ns(nbytes)
        while time.perf_counter_ns() < deadline:
            pass


def partition(extent: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, extent) into at most `parts` contiguous near-equal blocks.

    The first `extent % parts` blocks are one element longer. Empty blocks
    are dropped.
    """
    base, extra = divmod(extent, parts)
    blocks = []
    lo = 0
    for part in range(parts):
        hi = lo + base + (1 if part < extra else 0)
        if hi > lo:
            blocks.append((lo, hi))
        lo = hi
    return blocks


class Device(ABC):
    """Execution backend with a private buffer arena."""

    kind: DeviceKind

    def __init__(self, link: TransferModel | None = None, debug: bool = False) -> None:
        self.link = link or TransferModel()
        self.debug = debug
        self._arena: dict[int, tuple[Buffer, np.ndarray]] = {}

    @property
    @abstractmethod
    def worker_count(self) -> int: ...

    @property
    def label(self) -> str:
        return f"{self.kind.value}-host"

    def __repr__(self) -> str:
        return f"{type(self).__name__}(workers={self.worker_count})"

    def __enter__(self) -> "Device":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    # -- arena -------------------------------------------------------------

    def holds(self, buffer: Buffer) -> bool:
        return id(buffer) in self._arena

    def resolve(self, buffer: Buffer) -> np.ndarray:
        """Device-side array for a host buffer (shaped like the buffer)."""
        return self._arena[id(buffer)][1]

    def copy_in(self, buffer: Buffer) -> None:
        """Copy a host buffer into the arena, allocating on first use."""
        host = buffer.data.reshape(buffer.shape)
        entry = self._arena.get(id(buffer))
        if entry is None:
            self._arena[id(buffer)] = (buffer, host.copy())
        else:
            np.copyto(entry[1], host)
        self.link.pay(buffer.nbytes)

    def copy_out(self, buffer: Buffer) -> None:
        """Copy the arena copy of a buffer back over the host buffer."""
        np.copyto(buffer.data, self.resolve(buffer).ravel())
        self.link.pay(buffer.nbytes)

    def evict(self, buffers: Iterable[Buffer]) -> None:
        for buffer in buffers:
            self._arena.pop(id(buffer), None)

    def clear(self) -> None:
        self._arena.clear()

    @property
    def resident_bytes(self) -> int:
        return sum(array.nbytes for _, array in self._arena.values())

    # -- execution ---------------------------------------------------------

    def launch(self, kernel: Kernel, args: tuple[Any, ...]) -> None:
        """Run one kernel over its whole iteration space on arena arrays."""
        outer = kernel.space(args)[0]
        if self.debug:
            check_disjoint_writes(kernel, args, defaults.DEBUG_WRITE_SAMPLES)
        if outer > 0:
            self._run(kernel, outer, args)

    @abstractmethod
    def _run(self, kernel: Kernel, outer: int, args: tuple[Any, ...]) -> None: ...

    @abstractmethod
    def reduce(self, kernel: ReduceKernel, extent: int) -> Any: ...

    def close(self) -> None:
        self.clear()


class SerialHost(Device):
    """Single-threaded reference backend; blocks run in ascending order."""

    kind = DeviceKind.SERIAL

    @property
    def worker_count(self) -> int:
        return 1

    def _run(self, kernel: Kernel, outer: int, args: tuple[Any, ...]) -> None:
        kernel.body(0, outer, *args)

    def reduce(self, kernel: ReduceKernel, extent: int) -> Any:
        return kernel.fold(0, extent)


class ParallelHost(Device):
    """Thread-pool backend splitting the outermost dimension across workers."""

    kind = DeviceKind.PARALLEL

    def __init__(
        self,
        workers: int,
        link: TransferModel | None = None,
        debug: bool = False,
    ) -> None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        super().__init__(link=link, debug=debug)
        self._workers = workers
        self._pool: ThreadPoolExecutor | None = None

    @property
    def worker_count(self) -> int:
        return self._workers

    @property
    def pool(self) -> ThreadPoolExecutor:
        if self._pool is None:
            self._pool = ThreadPoolExecutor(
                max_workers=self._workers, thread_name_prefix="lane-worker"
            )
        return self._pool

    def _run(self, kernel: Kernel, outer: int, args: tuple[Any, ...]) -> None:
        futures = [
            self.pool.submit(kernel.body, lo, hi, *args)
            for lo, hi in partition(outer, self._workers)
        ]
        wait(futures)
        for future in futures:
            future.result()

    def reduce(self, kernel: ReduceKernel, extent: int) -> Any:
        futures = [
            self.pool.submit(kernel.fold, lo, hi)
            for lo, hi in partition(extent, self._workers)
        ]
        return kernel.merge([future.result() for future in futures])

    def close(self) -> None:
        super().close()
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None


def create_device(
    kind: DeviceKind | str,
    workers: int | None = None,
    link: TransferModel | None = None,
    debug: bool = False,
) -> Device:
    """Build a device of the given kind.

    Args:
        kind: "serial" or "parallel"
        workers: Pool size for parallel-host (default: logical core count)
        link: Emulated transfer link; None means plain memory copies
        debug: Enable the sampled disjoint-writes check

    Raises:
        ValueError: If the kind is unknown
    """
    kind = DeviceKind(kind)
    if kind is DeviceKind.SERIAL:
        device: Device = SerialHost(link=link, debug=debug)
    else:
        device = ParallelHost(
            workers or RuntimeConfig().workers, link=link, debug=debug
        )
    logger.debug("created %r (link=%s, debug=%s)", device, device.link, debug)
    return device


def link_from_config(config: RuntimeConfig) -> TransferModel:
    return TransferModel(
        latency_us=config.link_latency_us,
        bandwidth_gbps=config.link_bandwidth_gbps,
    )


def device_from_config(config: RuntimeConfig | None = None) -> Device:
    """Device described by a RuntimeConfig (default: from LANE_* variables).

    Only parallel-host pays the emulated link; serial-host is the plain
    host-memory baseline.
    """
    config = config or RuntimeConfig.from_env()
    link = link_from_config(config) if config.device is DeviceKind.PARALLEL else None
    return create_device(config.device, config.workers, link=link, debug=config.debug)
