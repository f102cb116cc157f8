"""
lane Command-Line Interface.

Benchmarks the backward kernels on serial-host and parallel-host devices,
sweeps the fully connected width, and runs training on dataset files.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

import logging
import os
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from lane import __version__
from lane.config import defaults
from lane.config.schema import (
    BenchConfig,
    DeviceKind,
    LaneConfig,
    OutputFormat,
    RuntimeConfig,
    TrainerConfig,
    get_default_config,
)
from lane.engine.benchmark import BenchmarkError, emit_report, emit_sweep, run_benchmark, run_sweep
from lane.engine.network import NetworkError, build_network
from lane.engine.trainer import EpochStats, TrainingError, evaluate, train
from lane.io.dataset import DataSetParseError, load_dataset, split
from lane.runtime.device import device_from_config
from lane.runtime.kernel import KernelError
from lane.runtime.schedule import ScheduleError
from lane.tensor.dense import RangeError, ShapeError
from lane.tensor.rng import SeededRng

console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger(__name__)

EXIT_RUNTIME = 1
EXIT_CONFIG = 2

RUNTIME_ERRORS = (
    BenchmarkError,
    DataSetParseError,
    KernelError,
    NetworkError,
    RangeError,
    ScheduleError,
    ShapeError,
    TrainingError,
    OSError,
)

DEVICE_CHOICE = click.Choice([kind.value for kind in DeviceKind])
FORMAT_CHOICE = click.Choice([fmt.value for fmt in OutputFormat])


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Map configuration errors to exit code 2 and runtime errors to 1."""
    try:
        yield
    except ValidationError as e:
        err_console.print(f"[red]Configuration error:[/red] {e}")
        sys.exit(EXIT_CONFIG)
    except RUNTIME_ERRORS as e:
        err_console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_RUNTIME)


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _int_list(value: str) -> list[int]:
    try:
        sizes = [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from e
    if not sizes:
        raise click.BadParameter("expected at least one size")
    return sizes


# =============================================================================
# Main CLI Group
# =============================================================================


@click.group()
@click.version_option(version=__version__, prog_name="lane")
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="LaneConfig file (.json/.yaml) whose values the flags override",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config_path: Optional[Path]) -> None:
    """
    lane - backward-kernel task schedules on serial and parallel hosts
    """
    _setup_logging(verbose)
    try:
        config = LaneConfig.from_file(config_path) if config_path else get_default_config()
    except (ValidationError, ValueError, FileNotFoundError, ImportError) as e:
        err_console.print(f"[red]Configuration error:[/red] {e}")
        sys.exit(EXIT_CONFIG)
    ctx.obj = config


def _runtime(config: LaneConfig) -> RuntimeConfig:
    """File/default runtime settings with LANE_* variables applied on top."""
    env = RuntimeConfig.from_env()
    return config.runtime.model_copy(update=env.model_dump(exclude_unset=True))


# =============================================================================
# Benchmark Commands
# =============================================================================


def _bench_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Flags shared by bench and sweep; unset flags keep config values."""
    options = [
        click.option("--dataset", type=click.Path(dir_okay=False, path_type=Path), help="Dataset file"),
        click.option(
            "--populate-random",
            is_flag=True,
            default=None,
            help="Fill a dataset of another width with random rows instead of failing",
        ),
        click.option("--features", type=int, help=f"Input features (default {defaults.BENCH_FEATURES})"),
        click.option("--classes", type=int, help=f"Output classes (default {defaults.BENCH_CLASSES})"),
        click.option("--eta", type=float, help="Learning rate"),
        click.option("--warmup", type=int, help=f"Warm-up executions (default {defaults.WARMUP_ITERATIONS})"),
        click.option("--iters", type=int, help=f"Timed executions (default {defaults.TIMED_ITERATIONS})"),
        click.option(
            "--enlarge",
            type=int,
            help=f"Replicate the dataset N times with noise (large set: {defaults.BENCH_ENLARGE_FACTOR})",
        ),
        click.option("--device", type=DEVICE_CHOICE, help="Device benchmarked against serial-host"),
        click.option("--workers", type=int, help="Parallel-host worker threads"),
        click.option("--seed", type=int, help="Seed for data, weights and noise"),
        click.option("--format", "fmt", type=FORMAT_CHOICE, help="Report format"),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the report here (default: stdout)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _bench_config(config: LaneConfig, **flags: Any) -> BenchConfig:
    """Bench section with flags applied; LANE_DEVICE / LANE_WORKERS fill unset flags."""
    env = RuntimeConfig.from_env().model_dump(exclude_unset=True)
    overrides = {
        "dataset_path": str(flags["dataset"]) if flags.get("dataset") else None,
        "populate_random": flags.get("populate_random"),
        "features": flags.get("features"),
        "classes": flags.get("classes"),
        "fc_neurons": flags.get("fc_neurons"),
        "eta": flags.get("eta"),
        "warmup_iters": flags.get("warmup"),
        "timed_iters": flags.get("iters"),
        "enlarge_factor": flags.get("enlarge"),
        "device": flags.get("device") or env.get("device"),
        "workers": flags.get("workers") or env.get("workers"),
        "seed": flags.get("seed"),
        "output_format": flags.get("fmt"),
    }
    return config.merge({"bench": overrides}).bench


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        err_console.print(f"[green]Report written to {out}[/green]")


@cli.command()
@_bench_options
@click.option("--fc-neurons", type=int, help=f"Hidden layer width (default {defaults.BENCH_FC_NEURONS})")
@click.pass_obj
def bench(config: LaneConfig, out: Optional[Path], **flags: Any) -> None:
    """Time softmax_backward and fc_backward per device."""
    with _exit_on_error():
        cfg = _bench_config(config, **flags)
        report = run_benchmark(cfg, _runtime(config))
        for device, digest in report.weights_digest.items():
            logger.info("weights digest %s: %s", device, digest)
        _write(emit_report(report, cfg.output_format), out)


@cli.command()
@_bench_options
@click.option(
    "--fc-sizes",
    default="100,1000,10000,100000",
    show_default=True,
    help="Comma-separated hidden layer widths",
)
@click.pass_obj
def sweep(config: LaneConfig, out: Optional[Path], fc_sizes: str, **flags: Any) -> None:
    """Benchmark across hidden widths to show the transfer-cost crossover."""
    sizes = _int_list(fc_sizes)
    with _exit_on_error():
        cfg = _bench_config(config, **flags)
        reports = run_sweep(cfg, sizes, _runtime(config))
        _write(emit_sweep(reports, cfg.output_format), out)


# =============================================================================
# Training
# =============================================================================


def _epoch_table(history: list[EpochStats], max_rows: int = 20) -> Table:
    table = Table(title="Training", box=None)
    table.add_column("Epoch", justify="right")
    table.add_column("Mean loss", justify="right")
    table.add_column("Accuracy", justify="right")

    stride = max(1, len(history) // max_rows)
    for stats in history:
        if stats.epoch == 1 or stats.epoch % stride == 0 or stats is history[-1]:
            table.add_row(str(stats.epoch), f"{stats.mean_loss:.6f}", f"{stats.accuracy:.4f}")
    return table


@cli.command(name="train")
@click.option(
    "--dataset",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Dataset file",
)
@click.option("--features", default=defaults.IRIS_FEATURES, show_default=True, help="Input features")
@click.option("--classes", default=defaults.IRIS_CLASSES, show_default=True, help="Output classes")
@click.option("--hidden", default="8", show_default=True, help="Comma-separated hidden layer widths")
@click.option("--eta", type=float, help="Learning rate")
@click.option("--max-epochs", type=int, help="Epoch limit")
@click.option("--max-error", type=float, help="Stop at this mean training loss")
@click.option("--seed", type=int, help="Seed for split, weights and shuffles")
@click.option("--device", type=DEVICE_CHOICE, help="Device running the backward kernels")
@click.option("--workers", type=int, help="Parallel-host worker threads")
@click.pass_obj
def train_command(
    config: LaneConfig,
    dataset: Path,
    features: int,
    classes: int,
    hidden: str,
    eta: Optional[float],
    max_epochs: Optional[int],
    max_error: Optional[float],
    seed: Optional[int],
    device: Optional[str],
    workers: Optional[int],
) -> None:
    """Train on a dataset file (0.9/0.1 split) and report test accuracy."""
    hidden_sizes = _int_list(hidden)
    with _exit_on_error():
        merged = config.merge(
            {
                "trainer": {
                    "eta": eta,
                    "max_epochs": max_epochs,
                    "max_error": max_error,
                    "seed": seed,
                },
            }
        )
        trainer_cfg: TrainerConfig = merged.trainer
        flags = {"device": device, "workers": workers}
        runtime = RuntimeConfig.model_validate(
            {**_runtime(merged).model_dump(), **{k: v for k, v in flags.items() if v is not None}}
        )

        data = load_dataset(dataset, features, classes)
        train_set, test_set = split(data, defaults.TRAIN_FRACTION, trainer_cfg.seed)
        net = build_network(features, hidden_sizes, classes, SeededRng(trainer_cfg.seed))

        console.print(
            f"[bold]{dataset.name}[/bold]: {len(train_set)} train / {len(test_set)} test, "
            f"network {features}-{'-'.join(map(str, hidden_sizes))}-{classes}, "
            f"{net.parameter_count:,} parameters"
        )
        with device_from_config(runtime) as backend:
            history = train(net, train_set, trainer_cfg, backend)
        result = evaluate(net, test_set)

        console.print(_epoch_table(history))
        console.print(
            f"Test accuracy: [bold]{result.accuracy:.4f}[/bold]  "
            f"mean loss: {result.mean_loss:.6f}"
        )


# =============================================================================
# Info
# =============================================================================


@cli.command()
@click.pass_obj
def info(config: LaneConfig) -> None:
    """Show version, devices and effective configuration."""
    with _exit_on_error():
        runtime = _runtime(config)
    bandwidth = (
        "unlimited"
        if runtime.link_bandwidth_gbps is None
        else f"{runtime.link_bandwidth_gbps:g} GB/s"
    )
    console.print(
        Panel.fit(
            f"""[bold blue]lane {__version__}[/bold blue]

[bold]Devices:[/bold]
  - serial-host: one thread, plain host copies
  - parallel-host: {runtime.workers} workers, link {runtime.link_latency_us:g} us + {bandwidth}

[bold]Host:[/bold] {os.cpu_count()} logical cores
[bold]Default device:[/bold] {runtime.device.value}-host
[bold]Debug write checks:[/bold] {"on" if runtime.debug else "off"}""",
            title="About lane",
            border_style="blue",
        )
    )

    table = Table(title="Benchmark defaults", box=None)
    table.add_column("Setting")
    table.add_column("Value", justify="right")
    for key, value in config.bench.model_dump(mode="json").items():
        table.add_row(key, str(value))
    console.print(table)


# =============================================================================
# Entry Point
# =============================================================================


if __name__ == "__main__":
    cli()
