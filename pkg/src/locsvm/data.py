"""Dataset container, LIBSVM text I/O, min-max scaling, seeded splits.

Data is held dense: an ``(n, d)`` float array of inputs plus an ``(n,)``
array of labels.  Sparse LIBSVM files are densified on read; at the
sizes this package targets nothing is gained by a sparse representation
and the solvers need dense kernel matrices anyway.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, DataFormatError, DimensionMismatchError
from .rng import derive_rng


class Sample(NamedTuple):
    features: np.ndarray
    label: float


@dataclass
class Dataset:
    """Ordered collection of labeled samples.

    ``X`` has shape ``(n, d)`` and ``y`` shape ``(n,)``; sample order is
    meaningful (splits and holdout schemes index into it).
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise DimensionMismatchError("X must be 2-dimensional (n, d)")
        if self.y.shape != (self.X.shape[0],):
            raise DimensionMismatchError(
                f"label shape {self.y.shape} does not match {self.X.shape[0]} samples"
            )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.X[i], float(self.y[i]))

    def __iter__(self) -> Iterator[Sample]:
        for i in range(self.n):
            yield self[i]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[idx], self.y[idx])


@dataclass
class ScalingTransform:
    """Componentwise affine map onto [-1, 1] for inputs and labels.

    A constant component (max == min) maps to 0 and inverts back to the
    constant, so round trips are exact up to float rounding.
    """

    feature_min: np.ndarray
    feature_max: np.ndarray
    label_min: float
    label_max: float

    @property
    def label_slope(self) -> float:
        """Multiplier applied to label offsets; 0 for constant labels."""
        span = self.label_max - self.label_min
        return 2.0 / span if span > 0 else 0.0


def parse_libsvm(text: str) -> Dataset:
    """Parse LIBSVM-format text into a dense dataset.

    Each line is ``label index:value ...`` with strictly increasing
    1-based indices; the dimension is the largest index seen anywhere.
    Malformed lines raise :class:`DataFormatError` with the line number.
    """
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise DataFormatError(f"line {lineno}: label {tokens[0]!r} is not a number")
        entries: list[tuple[int, float]] = []
        previous = 0
        for token in tokens[1:]:
            index_part, sep, value_part = token.partition(":")
            if not sep:
                raise DataFormatError(f"line {lineno}: expected index:value, got {token!r}")
            try:
                index = int(index_part)
            except ValueError:
                raise DataFormatError(f"line {lineno}: index {index_part!r} is not an integer")
            if index < 1:
                raise DataFormatError(f"line {lineno}: index {index} is not 1-based")
            if index <= previous:
                raise DataFormatError(
                    f"line {lineno}: index {index} not strictly increasing after {previous}"
                )
            try:
                value = float(value_part)
            except ValueError:
                raise DataFormatError(f"line {lineno}: value {value_part!r} is not a number")
            entries.append((index, value))
            previous = index
        labels.append(label)
        rows.append(entries)
        max_index = max(max_index, previous)
    X = np.zeros((len(rows), max_index))
    for i, entries in enumerate(rows):
        for index, value in entries:
            X[i, index - 1] = value
    return Dataset(X, np.asarray(labels))


def serialize_libsvm(data: Dataset) -> str:
    """Render a dataset as LIBSVM text, writing every component.

    Zeros are written explicitly so that the dimension survives a round
    trip; ``repr`` formatting keeps values bit-exact.
    """
    lines = []
    for i in range(data.n):
        parts = [repr(float(data.y[i]))]
        parts.extend(f"{j + 1}:{float(v)!r}" for j, v in enumerate(data.X[i]))
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def read_libsvm(path) -> Dataset:
    with open(path, "r", encoding="utf8") as fh:
        return parse_libsvm(fh.read())


def write_libsvm(path, data: Dataset) -> None:
    with open(path, "w", encoding="utf8") as fh:
        fh.write(serialize_libsvm(data))


def fit_scaling(data: Dataset) -> ScalingTransform:
    """Record componentwise input ranges and the label range."""
    if data.n == 0:
        raise DataFormatError("cannot fit scaling to an empty dataset")
    return ScalingTransform(
        feature_min=data.X.min(axis=0),
        feature_max=data.X.max(axis=0),
        label_min=float(data.y.min()),
        label_max=float(data.y.max()),
    )


def _affine_to_unit(values: np.ndarray, low, high) -> np.ndarray:
    span = np.asarray(high, dtype=np.float64) - np.asarray(low, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = 2.0 * (values - low) / span - 1.0
    return np.where(span > 0, scaled, 0.0)


def _affine_from_unit(values: np.ndarray, low, high) -> np.ndarray:
    span = np.asarray(high, dtype=np.float64) - np.asarray(low, dtype=np.float64)
    restored = low + (values + 1.0) * span / 2.0
    return np.where(span > 0, restored, low)


def apply_scaling(data: Dataset, transform: ScalingTransform) -> Dataset:
    """Map inputs and labels through the transform (no clipping).

    Values outside the fitted ranges land outside [-1, 1]; callers who
    fit on the full dataset before splitting never see that.
    """
    if data.d != transform.feature_min.shape[0]:
        raise DimensionMismatchError(
            f"dataset has {data.d} features, transform expects {transform.feature_min.shape[0]}"
        )
    X = _affine_to_unit(data.X, transform.feature_min, transform.feature_max)
    y = _affine_to_unit(data.y, transform.label_min, transform.label_max)
    return Dataset(X, y)


def invert_scaling(data: Dataset, transform: ScalingTransform) -> Dataset:
    """Undo :func:`apply_scaling`; constant components restore exactly."""
    X = _affine_from_unit(data.X, transform.feature_min, transform.feature_max)
    y = _affine_from_unit(data.y, transform.label_min, transform.label_max)
    return Dataset(X, y)


def split_train_test(data: Dataset, n_train: int, n_test: int, seed: int) -> tuple[Dataset, Dataset]:
    """Draw disjoint train and test sets by a seeded permutation."""
    if n_train < 0 or n_test < 0:
        raise ConfigError("split sizes must be nonnegative")
    if n_train + n_test > data.n:
        raise ConfigError(
            f"requested {n_train}+{n_test} samples from a dataset of {data.n}"
        )
    perm = derive_rng(seed, "split").permutation(data.n)
    return data.subset(perm[:n_train]), data.subset(perm[n_train:n_train + n_test])
