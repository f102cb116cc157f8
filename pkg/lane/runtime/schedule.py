"""
TaskSchedule: a named group of kernels executed together on one device.

Usage:
    schedule = (
        TaskSchedule("s0")
        .task("t0", MXM, a, b, c)
        .stream_out(c)
    )
    timing = schedule.execute()

Execution phases, in order:
    1. copy-in   stream_in buffers always; other buffer arguments only when
                 the device arena does not hold them yet
    2. kernels   tasks in declaration order, on arena arrays
    3. copy-out  stream_out buffers, arena -> host

Host buffers outside stream_out are never written by execute. Because the
arena persists between executes, an argument that is neither streamed in
nor changed on the device keeps the value it had when first copied.
"""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from lane.runtime.device import Device, SerialHost
from lane.runtime.kernel import Kernel
from lane.tensor.dense import DenseMatrix, DenseVector

logger = logging.getLogger(__name__)

NS_PER_MS = 1_000_000


class ScheduleError(Exception):
    """A schedule cannot be built or executed as declared."""


def _is_buffer(value: Any) -> bool:
    return isinstance(value, (DenseMatrix, DenseVector))


def _ms(ns: int) -> float:
    return ns / NS_PER_MS


@dataclass
class TaskTiming:
    """Kernel time of one task within an execute call.

    Copies are not attributed to tasks. Stream sets belong to the schedule,
    so copy-in and copy-out are timed once per execute in PhaseTiming.
    """

    name: str
    kernel_ms: float


@dataclass
class PhaseTiming:
    """Phase breakdown of one execute call, in milliseconds."""

    copy_in_ms: float = 0.0
    kernel_ms: float = 0.0
    copy_out_ms: float = 0.0
    tasks: list[TaskTiming] = field(default_factory=list)

    @property
    def total_ms(self) -> float:
        return self.copy_in_ms + self.kernel_ms + self.copy_out_ms

    @property
    def copy_ms(self) -> float:
        return self.copy_in_ms + self.copy_out_ms


@dataclass
class _Task:
    name: str
    kernel: Kernel
    args: tuple[Any, ...]


class TaskSchedule:
    """Ordered kernels plus stream-in / stream-out buffer sets, bound to a device."""

    def __init__(self, name: str, device: Device | None = None) -> None:
        self.name = name
        self._device = device
        self._tasks: list[_Task] = []
        self._stream_in: dict[int, Any] = {}
        self._stream_out: dict[int, Any] = {}

    def __repr__(self) -> str:
        return (
            f"TaskSchedule({self.name!r}, tasks={len(self._tasks)}, "
            f"device={self._device!r})"
        )

    @property
    def device(self) -> Device | None:
        """Bound device; None until the first execute or migrate."""
        return self._device

    @property
    def task_names(self) -> list[str]:
        return [task.name for task in self._tasks]

    @property
    def streamed_in(self) -> list[Any]:
        return list(self._stream_in.values())

    @property
    def streamed_out(self) -> list[Any]:
        return list(self._stream_out.values())

    def buffers(self) -> list[Any]:
        """Distinct buffer arguments in order of first appearance."""
        seen: dict[int, Any] = {}
        for task in self._tasks:
            for arg in task.args:
                if _is_buffer(arg):
                    seen.setdefault(id(arg), arg)
        return list(seen.values())

    # -- construction ------------------------------------------------------

    def stream_in(self, *buffers: Any) -> "TaskSchedule":
        """Mark buffers to be copied host -> device on every execute."""
        for buffer in buffers:
            self._stream_in.setdefault(id(buffer), buffer)
        return self

    def stream_out(self, *buffers: Any) -> "TaskSchedule":
        """Mark buffers to be copied device -> host after every execute."""
        for buffer in buffers:
            self._stream_out.setdefault(id(buffer), buffer)
        return self

    def add_task(
        self, kernel: Kernel, args: Sequence[Any], name: str | None = None
    ) -> "TaskSchedule":
        """Append a kernel launch.

        Raises:
            ScheduleError: If the argument count differs from the kernel's arity
        """
        if len(args) != kernel.arity:
            raise ScheduleError(
                f"task '{name or kernel.name}': kernel '{kernel.name}' takes "
                f"{kernel.arity} arguments, got {len(args)}"
            )
        self._tasks.append(_Task(name or kernel.name, kernel, tuple(args)))
        return self

    def task(self, name: str, kernel: Kernel, *args: Any) -> "TaskSchedule":
        """Named form of add_task."""
        return self.add_task(kernel, args, name=name)

    # -- execution ---------------------------------------------------------

    def validate(self) -> None:
        """Check that every streamed buffer is an argument of some task.

        Raises:
            ScheduleError: If a streamed value is not a task buffer argument
        """
        known = {id(buffer) for buffer in self.buffers()}
        marked_sets = (("stream_in", self._stream_in), ("stream_out", self._stream_out))
        for direction, marked in marked_sets:
            for key, buffer in marked.items():
                if key not in known:
                    raise ScheduleError(
                        f"schedule '{self.name}': {direction} value {buffer!r} "
                        "is not a buffer argument of any task"
                    )

    def execute(self) -> PhaseTiming:
        """Run copy-in, all tasks, and copy-out on the bound device.

        Binds a serial-host device if none was bound yet.

        Raises:
            ScheduleError: If validation fails
        """
        self.validate()
        if self._device is None:
            self._device = SerialHost()
        device = self._device
        timing = PhaseTiming()

        start = time.perf_counter_ns()
        for buffer in self.buffers():
            if id(buffer) in self._stream_in or not device.holds(buffer):
                device.copy_in(buffer)
        timing.copy_in_ms = _ms(time.perf_counter_ns() - start)

        for task in self._tasks:
            args = tuple(device.resolve(a) if _is_buffer(a) else a for a in task.args)
            start = time.perf_counter_ns()
            device.launch(task.kernel, args)
            elapsed = _ms(time.perf_counter_ns() - start)
            timing.tasks.append(TaskTiming(task.name, elapsed))
            timing.kernel_ms += elapsed

        start = time.perf_counter_ns()
        for buffer in self._stream_out.values():
            device.copy_out(buffer)
        timing.copy_out_ms = _ms(time.perf_counter_ns() - start)

        return timing

    def migrate(self, device: Device) -> "TaskSchedule":
        """Rebind to another device.

        The new device starts without this schedule's buffers, so the next
        execute copies every argument. Migrating to the bound device keeps
        its arena.
        """
        if device is self._device:
            return self
        buffers = self.buffers()
        if self._device is not None:
            self._device.evict(buffers)
        device.evict(buffers)
        logger.debug("schedule %r migrated %r -> %r", self.name, self._device, device)
        self._device = device
        return self


def schedule_build(name: str, device: Device | None = None) -> TaskSchedule:
    """Empty schedule, optionally pre-bound to a device."""
    return TaskSchedule(name, device)

