"""
Configuration schema for lane.

Provides Pydantic models for configuration validation and type safety.
Every field documents whether its default is published (taken from the
reference measurement protocol) or chosen by this project.
"""

import os
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator

from lane.config import defaults


class DeviceKind(str, Enum):
    """Execution backends a schedule can be bound to."""

    SERIAL = "serial"
    PARALLEL = "parallel"


class OutputFormat(str, Enum):
    """Benchmark report renderings."""

    CSV = "csv"
    MD = "md"


def _default_workers() -> int:
    return os.cpu_count() or 1


class RuntimeConfig(BaseModel):
    """Device selection and runtime switches."""

    device: DeviceKind = Field(
        default=DeviceKind.SERIAL,
        description="Backend used when a schedule is executed",
    )
    workers: int = Field(
        default_factory=_default_workers,
        ge=1,
        description="Worker threads of the parallel-host device (default: logical cores)",
    )
    debug: bool = Field(
        default=False,
        description="Sample kernel write sets and fail on overlapping writes",
    )
    link_latency_us: float = Field(
        default=defaults.LINK_LATENCY_US,
        ge=0.0,
        description="Emulated per-copy latency of the parallel-host link (chosen)",
    )
    link_bandwidth_gbps: float | None = Field(
        default=defaults.LINK_BANDWIDTH_GBPS,
        gt=0.0,
        description="Emulated link bandwidth in GB/s, None for unlimited (chosen)",
    )

    @classmethod
    def from_env(cls) -> "RuntimeConfig":
        """Create runtime config from LANE_* environment variables.

        Unset variables keep their defaults. Invalid values raise
        pydantic's ValidationError.
        """
        data: dict[str, Any] = {}
        if device := os.getenv("LANE_DEVICE"):
            data["device"] = device.strip().lower()
        if workers := os.getenv("LANE_WORKERS"):
            data["workers"] = workers
        if debug := os.getenv("LANE_DEBUG"):
            data["debug"] = debug.lower() in ("true", "1", "yes")
        if latency := os.getenv("LANE_LINK_LATENCY_US"):
            data["link_latency_us"] = latency
        if bandwidth := os.getenv("LANE_LINK_GBPS"):
            data["link_bandwidth_gbps"] = (
                None if bandwidth.lower() in ("none", "inf", "") else bandwidth
            )
        return cls.model_validate(data)


class TrainerConfig(BaseModel):
    """Backpropagation trainer parameters."""

    eta: float = Field(
        default=defaults.DEFAULT_ETA,
        gt=0.0,
        description="Learning rate passed into the backward kernels",
    )
    max_error: float = Field(
        default=0.0,
        ge=0.0,
        description="Stop once an epoch's mean cross-entropy is at or below this",
    )
    max_epochs: int = Field(
        default=defaults.DEFAULT_MAX_EPOCHS,
        ge=1,
        description="Hard epoch limit",
    )
    seed: int = Field(
        default=defaults.DEFAULT_SEED,
        ge=0,
        lt=2**64,
        description="Seed for weight init and per-epoch shuffles",
    )


class BenchConfig(BaseModel):
    """Benchmark harness parameters."""

    dataset_path: Path | None = Field(
        default=None,
        description="Dataset file; random data is synthesized when absent",
    )
    populate_random: bool = Field(
        default=False,
        description="Keep only the row count of a dataset whose widths differ "
        "from the benchmark topology and fill the rows randomly",
    )
    features: int = Field(default=defaults.BENCH_FEATURES, ge=1)
    classes: int = Field(default=defaults.BENCH_CLASSES, ge=2)
    fc_neurons: int = Field(default=defaults.BENCH_FC_NEURONS, ge=1)
    eta: float = Field(default=defaults.DEFAULT_ETA, gt=0.0)
    warmup_iters: int = Field(
        default=defaults.WARMUP_ITERATIONS,
        ge=0,
        description="Unmeasured executions per kernel before timing (published)",
    )
    timed_iters: int = Field(
        default=defaults.TIMED_ITERATIONS,
        ge=1,
        description="Measured executions averaged into the report (published)",
    )
    enlarge_factor: int = Field(default=1, ge=1)
    device: DeviceKind = Field(default=DeviceKind.PARALLEL)
    workers: int = Field(default_factory=_default_workers, ge=1)
    seed: int = Field(default=defaults.DEFAULT_SEED, ge=0, lt=2**64)
    output_format: OutputFormat = Field(default=OutputFormat.CSV)

    @field_validator("dataset_path")
    @classmethod
    def _dataset_exists(cls, value: Path | None) -> Path | None:
        if value is not None and not value.exists():
            raise ValueError(f"dataset file not found: {value}")
        return value


class LaneConfig(BaseModel):
    """Complete lane configuration.

    Top-level object holding the runtime, trainer and benchmark sections.
    """

    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LaneConfig":
        """Create configuration from a (possibly partial) dictionary."""
        return cls.model_validate(data)

    @classmethod
    def from_file(cls, path: str | Path) -> "LaneConfig":
        """Load configuration from a JSON or YAML file.

        Args:
            path: Path to configuration file (.json or .yaml/.yml)

        Returns:
            Parsed configuration

        Raises:
            FileNotFoundError: If file doesn't exist
            ValueError: If file format is not supported
        """
        path = Path(path)

        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        suffix = path.suffix.lower()

        if suffix == ".json":
            import json

            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        elif suffix in (".yaml", ".yml"):
            try:
                import yaml  # type: ignore[import-untyped]

                with open(path, encoding="utf-8") as f:
                    data = yaml.safe_load(f)
            except ImportError as e:
                raise ImportError(
                    "PyYAML is required for YAML config files. "
                    "Install with: pip install 'lane[yaml]'"
                ) from e
        else:
            raise ValueError(
                f"Unsupported config file format: {suffix}. Use .json or .yaml/.yml"
            )

        return cls.from_dict(data or {})

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to a JSON-compatible dictionary."""
        return self.model_dump(mode="json")

    def to_file(self, path: str | Path) -> None:
        """Save configuration to a JSON file."""
        import json

        path = Path(path)
        if path.suffix.lower() != ".json":
            raise ValueError(f"Unsupported config file format: {path.suffix}. Use .json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    def merge(self, overrides: dict[str, Any]) -> "LaneConfig":
        """Create a new config with overrides applied.

        Args:
            overrides: Nested dictionary of values to override; None values
                are ignored so unset CLI flags keep file/default values.

        Returns:
            New LaneConfig with overrides merged in
        """
        base = self.to_dict()
        _deep_merge(base, overrides)
        return LaneConfig.from_dict(base)


def _deep_merge(base: dict[str, Any], overrides: dict[str, Any]) -> None:
    """Deep merge overrides into base dict (in place), skipping None values."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value


def get_default_config() -> LaneConfig:
    """Get the default lane configuration."""
    return LaneConfig()
