"""
Backward-kernel benchmark harness.

Measurement protocol:
    1. Load the dataset (or synthesize one with the benchmark's widths) and
       optionally enlarge it.
    2. Self-test: one training step from identical initial state on every
       benchmarked device; stream-out buffers must match bit for bit.
    3. Per device, from a freshly seeded network: `warmup_iters` unmeasured
       training steps, then `timed_iters` measured ones. A step is forward
       (untimed), softmax_backward execute, fc_backward execute, and weight
       updates (untimed), on the next sample in dataset order.
    4. Report per-invocation arithmetic means of each execute's total and its
       copy-in / kernel / copy-out phases, plus speedup over serial-host.

The serial-host baseline always runs. The configured device runs in
addition when it is parallel-host. Timings vary between runs; the weights
digest after the last step does not.

Usage:
    report = run_benchmark(BenchConfig(fc_neurons=1000, warmup_iters=100))
    print(emit_report(report, OutputFormat.MD))
"""

import hashlib
import logging
import math
import statistics
from collections.abc import Sequence

from pydantic import BaseModel, Field

from lane.config import defaults
from lane.config.schema import BenchConfig, DeviceKind, OutputFormat, RuntimeConfig
from lane.engine.network import FeedForwardNetwork, build_network
from lane.io.dataset import DataSet, enlarge, file_layout, load_dataset, synthesize
from lane.runtime.device import Device, create_device, link_from_config
from lane.runtime.schedule import PhaseTiming, TaskSchedule
from lane.tensor.rng import SeededRng

logger = logging.getLogger(__name__)

KERNELS = ("softmax_backward", "fc_backward")
COLUMNS = ("kernel", "device", "mean_ms", "copy_in_ms", "kernel_ms", "copy_out_ms", "speedup")

# Spawn keys separating the benchmark's random streams.
_DATA_STREAM = 1
_ENLARGE_STREAM = 2


class BenchmarkError(Exception):
    """The benchmark cannot run or its self-test failed."""


class BenchRow(BaseModel):
    """Timing summary of one kernel on one device."""

    kernel: str
    device: str
    samples_ms: list[float] = Field(default_factory=list)
    mean_ms: float = Field(ge=0.0)
    copy_in_ms: float = Field(ge=0.0)
    kernel_ms: float = Field(ge=0.0)
    copy_out_ms: float = Field(ge=0.0)
    speedup: float = 1.0

    @classmethod
    def from_timings(cls, kernel: str, device: str, timings: list[PhaseTiming]) -> "BenchRow":
        """Summarize recorded executes; means are plain arithmetic means."""
        if not timings:
            raise BenchmarkError(f"no timed samples for {kernel} on {device}")
        samples = [t.total_ms for t in timings]
        return cls(
            kernel=kernel,
            device=device,
            samples_ms=samples,
            mean_ms=statistics.fmean(samples),
            copy_in_ms=statistics.fmean(t.copy_in_ms for t in timings),
            kernel_ms=statistics.fmean(t.kernel_ms for t in timings),
            copy_out_ms=statistics.fmean(t.copy_out_ms for t in timings),
        )


class BenchReport(BaseModel):
    """All rows of one benchmark run."""

    fc_neurons: int = 0
    rows: list[BenchRow] = Field(default_factory=list)
    weights_digest: dict[str, str] = Field(default_factory=dict)

    def row(self, kernel: str, device: str) -> BenchRow:
        for row in self.rows:
            if row.kernel == kernel and row.device == device:
                return row
        raise KeyError(f"no row for {kernel} on {device}")

    def assign_speedups(self) -> "BenchReport":
        """speedup = serial mean / row mean for the same kernel.

        Serial rows get exactly 1.0. Rows without a serial baseline get NaN.
        """
        baselines = {r.kernel: r.mean_ms for r in self.rows if r.device == DeviceKind.SERIAL.value}
        for row in self.rows:
            baseline = baselines.get(row.kernel)
            if row.device == DeviceKind.SERIAL.value:
                row.speedup = 1.0
            elif baseline is None:
                row.speedup = math.nan
            elif row.mean_ms > 0:
                row.speedup = baseline / row.mean_ms
            else:
                row.speedup = math.inf
        return self


# =============================================================================
# Rendering
# =============================================================================


def _cells(row: BenchRow) -> list[str]:
    return [
        row.kernel,
        row.device,
        f"{row.mean_ms:.3f}",
        f"{row.copy_in_ms:.3f}",
        f"{row.kernel_ms:.3f}",
        f"{row.copy_out_ms:.3f}",
        f"{row.speedup:.3f}",
    ]


def _render(header: Sequence[str], lines: list[list[str]], fmt: OutputFormat) -> str:
    if OutputFormat(fmt) is OutputFormat.CSV:
        out = [",".join(header)] + [",".join(cells) for cells in lines]
    else:
        out = [
            "| " + " | ".join(header) + " |",
            "|" + "|".join("---" for _ in header) + "|",
        ] + ["| " + " | ".join(cells) + " |" for cells in lines]
    return "\n".join(out) + "\n"


def emit_report(report: BenchReport, fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """Render a report as CSV or a Markdown table, floats to 3 decimals."""
    return _render(COLUMNS, [_cells(row) for row in report.rows], OutputFormat(fmt))


def emit_sweep(reports: Sequence[BenchReport], fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """Render several reports as one table with a leading fc_neurons column."""
    lines = [
        [str(report.fc_neurons), *_cells(row)] for report in reports for row in report.rows
    ]
    return _render(("fc_neurons", *COLUMNS), lines, OutputFormat(fmt))


# =============================================================================
# Measurement
# =============================================================================


def load_bench_data(cfg: BenchConfig) -> DataSet:
    """Dataset for the benchmark, enlarged by cfg.enlarge_factor.

    The file is loaded at the benchmark's widths, so parse and width errors
    propagate. With cfg.populate_random, a file of another width only
    supplies the sample count and its rows are filled randomly. Without a
    file, IRIS_ITEMS random rows are synthesized.

    Raises:
        BenchmarkError: If the dataset file has no samples
        DataSetParseError: If the file does not parse at the benchmark's widths
    """
    rng = SeededRng(cfg.seed)
    rows = defaults.IRIS_ITEMS
    data = None
    if cfg.dataset_path is not None:
        fields, rows = file_layout(cfg.dataset_path)
        if rows == 0:
            raise BenchmarkError(f"dataset {cfg.dataset_path} is empty")
        if cfg.populate_random and fields != cfg.features + cfg.classes:
            logger.warning(
                "%s has %d fields per line, benchmark needs %d; populating %d rows randomly",
                cfg.dataset_path,
                fields,
                cfg.features + cfg.classes,
                rows,
            )
        else:
            data = load_dataset(cfg.dataset_path, cfg.features, cfg.classes)
    if data is None:
        data = synthesize(rows, cfg.features, cfg.classes, rng.derive(_DATA_STREAM))
    if cfg.enlarge_factor > 1:
        data = enlarge(
            data, cfg.enlarge_factor, defaults.DEFAULT_ENLARGE_NOISE, rng.derive(_ENLARGE_STREAM)
        )
    return data


def _bench_network(cfg: BenchConfig) -> FeedForwardNetwork:
    return build_network(cfg.features, [cfg.fc_neurons], cfg.classes, SeededRng(cfg.seed))


def _stream_out_digest(schedules: list[TaskSchedule]) -> str:
    digest = hashlib.sha256()
    for schedule in schedules:
        for buffer in schedule.streamed_out:
            digest.update(buffer.data.tobytes())
    return digest.hexdigest()


def _release(device: Device, schedules: list[TaskSchedule]) -> None:
    for schedule in schedules:
        device.evict(schedule.buffers())


def self_test(cfg: BenchConfig, data: DataSet, devices: Sequence[Device]) -> None:
    """Run one step per device from identical state and compare stream-out buffers.

    Raises:
        BenchmarkError: If any device's buffers differ from the first device's
    """
    digests = {}
    for device in devices:
        net = _bench_network(cfg)
        schedules = net.backward_schedules(cfg.eta, device)
        net.forward(data[0].features)
        net.output.set_target(data[0].label)
        for schedule in schedules:
            schedule.execute()
        digests[device.label] = _stream_out_digest(schedules)
        _release(device, schedules)
    if len(set(digests.values())) > 1:
        raise BenchmarkError(f"backend self-test failed: stream-out digests differ {digests}")
    logger.info("self-test passed on %s", ", ".join(digests))


def measure(cfg: BenchConfig, data: DataSet, device: Device) -> tuple[list[BenchRow], str]:
    """Warm up, then time both backward kernels on one device.

    Returns:
        (one row per kernel, weights digest after the last step)
    """
    net = _bench_network(cfg)
    softmax_schedule, fc_schedule = net.backward_schedules(cfg.eta, device)
    recorded: dict[str, list[PhaseTiming]] = {kernel: [] for kernel in KERNELS}
    total = cfg.warmup_iters + cfg.timed_iters

    logger.info(
        "%s: %d warm-up + %d timed steps (fc_neurons=%d)",
        device.label,
        cfg.warmup_iters,
        cfg.timed_iters,
        cfg.fc_neurons,
    )
    try:
        for iteration in range(total):
            item = data[iteration % len(data)]
            net.forward(item.features)
            net.output.set_target(item.label)
            softmax_timing = softmax_schedule.execute()
            fc_timing = fc_schedule.execute()
            net.apply_updates()
            if iteration >= cfg.warmup_iters:
                recorded["softmax_backward"].append(softmax_timing)
                recorded["fc_backward"].append(fc_timing)
    finally:
        _release(device, [softmax_schedule, fc_schedule])

    rows = [BenchRow.from_timings(kernel, device.kind.value, recorded[kernel]) for kernel in KERNELS]
    return rows, net.state_digest()


def run_benchmark(cfg: BenchConfig, runtime: RuntimeConfig | None = None) -> BenchReport:
    """Run the full protocol for one configuration.

    Args:
        cfg: Benchmark parameters
        runtime: Link model and debug switch for the parallel device
            (default: from LANE_* environment variables)

    Raises:
        BenchmarkError: If the dataset is empty or the self-test fails
    """
    runtime = runtime or RuntimeConfig.from_env()
    data = load_bench_data(cfg)
    devices = [create_device(DeviceKind.SERIAL, debug=runtime.debug)]
    if cfg.device is DeviceKind.PARALLEL:
        devices.append(
            create_device(
                DeviceKind.PARALLEL,
                cfg.workers,
                link=link_from_config(runtime),
                debug=runtime.debug,
            )
        )

    report = BenchReport(fc_neurons=cfg.fc_neurons)
    try:
        self_test(cfg, data, devices)
        for device in devices:
            rows, digest = measure(cfg, data, device)
            report.rows.extend(rows)
            report.weights_digest[device.kind.value] = digest
    finally:
        for device in devices:
            device.close()

    return report.assign_speedups()


def run_sweep(
    cfg: BenchConfig, fc_sizes: Sequence[int], runtime: RuntimeConfig | None = None
) -> list[BenchReport]:
    """run_benchmark over several fully connected widths."""
    return [
        run_benchmark(cfg.model_copy(update={"fc_neurons": size}), runtime)
        for size in fc_sizes
    ]
