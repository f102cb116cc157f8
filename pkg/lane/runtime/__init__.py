"""
Task runtime for lane.

This module provides:
- Kernel / ReduceKernel descriptors for parallel loop nests
- Serial-host and parallel-host devices with private buffer arenas
- TaskSchedule with stream-in / stream-out sets, execute and migrate
- Parallel reductions
"""

from lane.runtime.device import (
    Device,
    ParallelHost,
    SerialHost,
    TransferModel,
    create_device,
    device_from_config,
    link_from_config,
    partition,
)
from lane.runtime.kernel import (
    DisjointWriteError,
    Kernel,
    KernelError,
    ReduceKernel,
    check_disjoint_writes,
)
from lane.runtime.reduce import max_of, parallel_reduce, sum_of
from lane.runtime.schedule import (
    PhaseTiming,
    ScheduleError,
    TaskSchedule,
    TaskTiming,
    schedule_build,
)

__all__ = [
    # Devices
    "Device",
    "ParallelHost",
    "SerialHost",
    "TransferModel",
    "create_device",
    "device_from_config",
    "link_from_config",
    "partition",
    # Kernels
    "DisjointWriteError",
    "Kernel",
    "KernelError",
    "ReduceKernel",
    "check_disjoint_writes",
    # Reductions
    "max_of",
    "parallel_reduce",
    "sum_of",
    # Schedules
    "PhaseTiming",
    "ScheduleError",
    "TaskSchedule",
    "TaskTiming",
    "schedule_build",
]
