"""
Dataset I/O for lane.

This module handles reading, writing, splitting and enlarging the
comma-separated, one-hot labelled dataset format.
"""

from lane.io.dataset import (
    DataItem,
    DataSet,
    DataSetParseError,
    DataSetValidationError,
    enlarge,
    file_layout,
    is_one_hot,
    load_dataset,
    save_dataset,
    split,
    synthesize,
)

__all__ = [
    "DataItem",
    "DataSet",
    "DataSetParseError",
    "DataSetValidationError",
    "enlarge",
    "file_layout",
    "is_one_hot",
    "load_dataset",
    "save_dataset",
    "split",
    "synthesize",
]
