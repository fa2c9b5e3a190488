"""Labeled prediction matrices: loading, validation, splits, error indicators.

A dataset couples an N-vector of ground-truth labels in {-1, +1} with an
N x M matrix of per-model predictions over the same alphabet. Datasets are
immutable after construction; all operations here are pure.

CSV format (UTF-8, comma-separated, Unix newlines):
    label,<model_name_1>,...,<model_name_M>
    <+1|-1>,<+1|-1>,...          # exactly M+1 fields per row
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetFormatError

__all__ = [
    "Dataset",
    "WeightedDataset",
    "SplitSpec",
    "load_dataset",
    "loads_dataset",
    "save_dataset",
    "dumps_dataset",
    "error_matrix",
    "split_train_test",
]


def _as_sign_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int8)
    if not np.all(np.isin(arr, (-1, 1))):
        raise ValueError(f"{name} must take values in {{-1, +1}}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled prediction matrix.

    labels: shape (N,), values in {-1, +1}
    predictions: shape (N, M), values in {-1, +1}
    model_names: M unique strings, one per prediction column
    """

    labels: np.ndarray
    predictions: np.ndarray
    model_names: tuple[str, ...]

    def __post_init__(self):
        labels = _as_sign_array(self.labels, "labels")
        predictions = _as_sign_array(self.predictions, "predictions")
        names = tuple(str(n) for n in self.model_names)
        if labels.ndim != 1 or predictions.ndim != 2:
            raise ValueError("labels must be 1-D and predictions 2-D")
        n, m = predictions.shape
        if n < 1 or m < 1:
            raise ValueError("dataset needs at least one row and one model")
        if labels.shape[0] != n:
            raise ValueError("labels and predictions disagree on row count")
        if len(names) != m:
            raise ValueError("model_names must match the prediction column count")
        if len(set(names)) != m:
            raise ValueError("model names must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "model_names", names)

    @property
    def n_rows(self) -> int:
        return self.predictions.shape[0]

    @property
    def n_models(self) -> int:
        return self.predictions.shape[1]

    @property
    def weights(self):
        """Uniform weighting; see WeightedDataset for explicit weights."""
        return None

    def take_rows(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.labels[indices], self.predictions[indices], self.model_names)


@dataclass(frozen=True)
class WeightedDataset(Dataset):
    """Prediction patterns with explicit probability weights.

    Lets exact enumerated distributions flow through the same counting
    estimators as sampled data: each row is one (label, pattern) outcome
    and ``row_weights`` its probability mass (any positive scale).
    """

    row_weights: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        w = np.array(self.row_weights, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != self.labels.shape[0]:
            raise ValueError("row_weights must be 1-D with one entry per row")
        if not np.all(np.isfinite(w)) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("row_weights must be finite, nonnegative, not all zero")
        w.flags.writeable = False
        object.__setattr__(self, "row_weights", w)

    @property
    def weights(self) -> np.ndarray:
        return self.row_weights

    def take_rows(self, indices: np.ndarray) -> "WeightedDataset":
        return WeightedDataset(
            self.labels[indices],
            self.predictions[indices],
            self.model_names,
            self.row_weights[indices],
        )


@dataclass(frozen=True)
class SplitSpec:
    """Reproducible train/test split family.

    Split ``i`` shuffles rows with numpy's PCG64 generator seeded by
    ``seed + i`` (mod 2**64) and takes the first round(N * train_fraction)
    shuffled rows as the training set.
    """

    train_fraction: float
    seed: int
    num_splits: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.num_splits < 1:
            raise ValueError("num_splits must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def error_matrix(d: Dataset) -> np.ndarray:
    """N x M matrix over {0, 1}; entry (i, j) is 1 iff model j errs on row i."""
    return (d.predictions != d.labels[:, None]).astype(np.uint8)


def split_train_test(d: Dataset, spec: SplitSpec, split_index: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled partition of the dataset rows."""
    if not 0 <= split_index < spec.num_splits:
        raise ValueError(f"split_index {split_index} outside [0, {spec.num_splits})")
    n = d.n_rows
    n_train = int(round(n * spec.train_fraction))
    if n_train < 1 or n_train >= n:
        raise ValueError(
            f"degenerate split: {n} rows at fraction {spec.train_fraction} "
            f"gives train size {n_train}"
        )
    rng = np.random.default_rng((int(spec.seed) + split_index) % 2**64)
    perm = rng.permutation(n)
    return d.take_rows(perm[:n_train]), d.take_rows(perm[n_train:])


def _parse_sign(token: str, line: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise DatasetFormatError(f"cannot parse {token!r} as +1 or -1", line) from None
    if value not in (-1, 1):
        raise DatasetFormatError(f"value {value} outside {{-1, +1}}", line)
    return value


def loads_dataset(text: str) -> Dataset:
    """Parse a dataset from CSV text."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise DatasetFormatError("empty file")
    header = rows[0]
    if len(header) < 2 or header[0] != "label":
        raise DatasetFormatError(
            "header must be 'label,<model_1>,...,<model_M>'", line=1
        )
    names = header[1:]
    if len(set(names)) != len(names):
        raise DatasetFormatError("duplicate model name in header", line=1)
    m = len(names)
    labels = []
    predictions = []
    for offset, row in enumerate(rows[1:], start=2):
        if len(row) != m + 1:
            raise DatasetFormatError(
                f"expected {m + 1} fields, found {len(row)}", line=offset
            )
        labels.append(_parse_sign(row[0], offset))
        predictions.append([_parse_sign(tok, offset) for tok in row[1:]])
    if not labels:
        raise DatasetFormatError("no data rows after header")
    return Dataset(np.array(labels), np.array(predictions), tuple(names))


def load_dataset(path) -> Dataset:
    return loads_dataset(Path(path).read_text(encoding="utf-8"))


def dumps_dataset(d: Dataset) -> str:
    """Serialize to the CSV format accepted by load_dataset."""
    out = io.StringIO()
    out.write("label," + ",".join(d.model_names) + "\n")
    fmt = {1: "+1", -1: "-1"}
    for label, row in zip(d.labels, d.predictions):
        out.write(fmt[int(label)] + "," + ",".join(fmt[int(v)] for v in row) + "\n")
    return out.getvalue()


def save_dataset(d: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(d), encoding="utf-8", newline="")
