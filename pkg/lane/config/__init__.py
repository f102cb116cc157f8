"""
Configuration management for lane.

This module provides:
- Published and chosen default constants
- Pydantic configuration schema with environment and file loading
"""

from lane.config.schema import (
    BenchConfig,
    DeviceKind,
    LaneConfig,
    OutputFormat,
    RuntimeConfig,
    TrainerConfig,
    get_default_config,
)

__all__ = [
    "BenchConfig",
    "DeviceKind",
    "LaneConfig",
    "OutputFormat",
    "RuntimeConfig",
    "TrainerConfig",
    "get_default_config",
]
