"""
Dataset loading, splitting and enlargement.

File format (comma-separated, one sample per line):
    f_1,...,f_F,l_1,...,l_C

F feature values are followed by a C-wide one-hot label. Values are decimal
floats; blank lines are ignored. Example with F=4, C=3:
    0.1,0.2,0.3,0.4,1,0,0
"""

import math
from collections.abc import Iterator
from pathlib import Path
from typing import NamedTuple, TextIO

import numpy as np

from lane.config import defaults
from lane.tensor.dense import FLOAT, DenseVector, RangeError
from lane.tensor.rng import SeededRng


class DataSetParseError(Exception):
    """A dataset line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"Line {line_number}: {message}"
        super().__init__(message)


class DataSetValidationError(DataSetParseError):
    """A dataset line parsed but breaks a dataset invariant (e.g. label not one-hot)."""


class DataItem(NamedTuple):
    features: DenseVector
    label: DenseVector


def is_one_hot(values: np.ndarray) -> bool:
    """Exactly one element equals 1 and every other element equals 0."""
    return bool(np.count_nonzero(values == 1) == 1 and np.count_nonzero(values) == 1)


class DataSet:
    """Samples of fixed feature width with one-hot labels."""

    def __init__(
        self,
        feature_width: int,
        class_count: int,
        items: list[DataItem] | None = None,
    ) -> None:
        if feature_width < 1 or class_count < 1:
            raise ValueError(
                f"dataset widths must be >= 1, got {feature_width} features, "
                f"{class_count} classes"
            )
        self.feature_width = feature_width
        self.class_count = class_count
        self.items: list[DataItem] = []
        for item in items or []:
            self.add(item.features, item.label)

    def __repr__(self) -> str:
        return (
            f"DataSet(items={len(self.items)}, features={self.feature_width}, "
            f"classes={self.class_count})"
        )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[DataItem]:
        return iter(self.items)

    def __getitem__(self, index: int) -> DataItem:
        return self.items[index]

    def add(self, features: DenseVector, label: DenseVector) -> None:
        """Append a sample.

        Raises:
            ValueError: If widths differ from the dataset's or the label is not one-hot
        """
        if features.len != self.feature_width:
            raise ValueError(
                f"sample has {features.len} features, dataset has {self.feature_width}"
            )
        if label.len != self.class_count:
            raise ValueError(
                f"label has {label.len} classes, dataset has {self.class_count}"
            )
        if not is_one_hot(label.data):
            raise ValueError(f"label {label.data.tolist()} is not one-hot")
        self.items.append(DataItem(features, label))

    def empty_like(self) -> "DataSet":
        return DataSet(self.feature_width, self.class_count)

    def class_counts(self) -> np.ndarray:
        """Number of samples per class."""
        counts = np.zeros(self.class_count, dtype=np.int64)
        for item in self.items:
            counts[item.label.argmax()] += 1
        return counts


def _parse_fields(line: str, expected: int, line_number: int) -> np.ndarray:
    fields = [part.strip() for part in line.split(",")]
    if len(fields) != expected:
        raise DataSetParseError(
            f"Expected {expected} values, got {len(fields)}", line_number
        )
    try:
        values = np.array([float(value) for value in fields], dtype=FLOAT)
    except ValueError as e:
        raise DataSetParseError(f"Invalid numeric value: {e}", line_number) from e
    if not np.all(np.isfinite(values)):
        raise DataSetParseError("Non-finite value", line_number)
    return values


def _read_lines(source: str | Path | TextIO) -> list[str]:
    """Lines of a path (decoded one at a time) or of a text stream."""
    if not isinstance(source, (str, Path)):
        try:
            return source.read().splitlines()
        except UnicodeDecodeError as e:
            raise DataSetParseError(f"Invalid UTF-8: {e.reason}") from e

    with open(source, "rb") as f:
        raw_lines = f.read().splitlines()
    lines = []
    for line_number, raw in enumerate(raw_lines, start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise DataSetParseError(f"Invalid UTF-8: {e.reason}", line_number) from e
    return lines


def load_dataset(
    source: str | Path | TextIO, feature_width: int, class_count: int
) -> DataSet:
    """Parse a dataset file, preserving line order.

    Args:
        source: File path, path object, or file-like object
        feature_width: Number of leading feature columns
        class_count: Number of trailing one-hot label columns

    Returns:
        Parsed DataSet (empty for an empty file)

    Raises:
        FileNotFoundError: If source is a path and the file doesn't exist
        DataSetParseError: If a line is not UTF-8, has the wrong field count,
            or holds a non-numeric or non-finite field
        DataSetValidationError: If a label is not one-hot
    """
    lines = _read_lines(source)
    dataset = DataSet(feature_width, class_count)
    expected = feature_width + class_count
    for line_number, line in enumerate(lines, start=1):
        line = line.replace("\r", "")
        if not line.strip():
            continue
        values = _parse_fields(line, expected, line_number)
        label = values[feature_width:]
        if not is_one_hot(label):
            raise DataSetValidationError(
                f"label {label.tolist()} is not one-hot", line_number
            )
        dataset.items.append(
            DataItem(
                DenseVector.from_values(values[:feature_width]),
                DenseVector.from_values(label),
            )
        )
    return dataset


def file_layout(path: str | Path) -> tuple[int, int]:
    """(fields in the first non-blank line, number of non-blank lines).

    Returns (0, 0) for an empty file. Undecodable bytes are replaced, not
    reported; load_dataset reports them.
    """
    fields = rows = 0
    with open(path, encoding="utf-8", errors="replace") as f:
        for line in f:
            if not line.strip():
                continue
            if rows == 0:
                fields = len(line.split(","))
            rows += 1
    return fields, rows


def save_dataset(dataset: DataSet, destination: str | Path | TextIO) -> None:
    """Write a dataset in the load_dataset format (9 significant digits)."""
    digits = defaults.SAVE_DIGITS
    lines = []
    for item in dataset:
        values = np.concatenate([item.features.data, item.label.data])
        lines.append(",".join(f"{float(v):.{digits}g}" for v in values))
    content = "\n".join(lines) + ("\n" if lines else "")

    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8") as f:
            f.write(content)
    else:
        destination.write(content)


def split(
    dataset: DataSet, train_fraction: float, seed: int
) -> tuple[DataSet, DataSet]:
    """Shuffle with `seed`, then cut at floor(train_fraction * n).

    Items are shared with the input dataset, not copied.

    Raises:
        RangeError: If train_fraction is not strictly between 0 and 1
    """
    if not 0.0 < train_fraction < 1.0:
        raise RangeError(f"train fraction must be in (0, 1), got {train_fraction}")
    order = SeededRng(seed).permutation(len(dataset))
    cut = math.floor(train_fraction * len(dataset))
    train, test = dataset.empty_like(), dataset.empty_like()
    train.items = [dataset.items[i] for i in order[:cut]]
    test.items = [dataset.items[i] for i in order[cut:]]
    return train, test


def enlarge(dataset: DataSet, factor: int, noise: float, rng: SeededRng) -> DataSet:
    """Replicate every item `factor` times with uniform feature noise.

    The output holds `factor` passes over the input in order. With noise > 0
    each copy's features are perturbed by U[-noise, noise] and clamped to
    [0, 1]; with noise == 0 features are copied bit for bit. Labels are
    always copied unchanged.

    Raises:
        RangeError: If factor < 1 or noise < 0
    """
    if factor < 1:
        raise RangeError(f"enlarge factor must be >= 1, got {factor}")
    if noise < 0:
        raise RangeError(f"noise must be >= 0, got {noise}")

    result = dataset.empty_like()
    for _ in range(factor):
        for item in dataset:
            if noise > 0:
                jitter = rng.uniform(-noise, noise, dataset.feature_width)
                values = np.clip(item.features.data + jitter, 0.0, 1.0)
                features = DenseVector.from_values(values)
            else:
                features = item.features.copy()
            result.items.append(DataItem(features, item.label.copy()))
    return result


def synthesize(
    n: int, feature_width: int, class_count: int, rng: SeededRng
) -> DataSet:
    """Random dataset: U[0, 1) features, labels cycling through the classes."""
    dataset = DataSet(feature_width, class_count)
    for index in range(n):
        label = np.zeros(class_count, dtype=FLOAT)
        label[index % class_count] = 1.0
        dataset.items.append(
            DataItem(
                DenseVector.from_values(rng.random(feature_width)),
                DenseVector.from_values(label),
            )
        )
    return dataset
