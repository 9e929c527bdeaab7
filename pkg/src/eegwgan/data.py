"""Segment files, file-wise min-max scaling, batch sampling and toy data.

A segment file is a headerless CSV of reals with one sample per row. Its
class label comes from the filename prefix: ``1_*.csv`` files are label 1,
``0_*.csv`` files are label 0.
"""

import csv
import os
import re
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DegenerateFileError, EmptyDatasetError, ParseError, ShapeError
from .nn import check_labels

__all__ = [
    "SEG_LEN",
    "Dataset",
    "FileMinMaxScaler",
    "minmax_scale_file",
    "read_segment_csv",
    "write_segment_csv",
    "load_dataset_dir",
    "sample_real_batch",
    "make_toy_dataset",
    "write_toy_dataset",
]

SEG_LEN = 32
LABEL_PATTERN = re.compile(r"^([01])_")


@dataclass(frozen=True)
class Dataset:
    """Scaled segments with their labels. Arrays are read-only."""

    samples: np.ndarray
    labels: np.ndarray
    seg_len: int = SEG_LEN

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float32, ndmin=2)
        if samples.shape[1] != self.seg_len:
            raise ShapeError(f"samples have {samples.shape[1]} columns, expected {self.seg_len}")
        labels = check_labels(self.labels, n=samples.shape[0])
        if samples.size and (samples.min() < -1 or samples.max() > 1):
            raise ValueError("dataset samples must lie in [-1, 1]")
        samples.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.samples.shape[0]

    def class_counts(self):
        return {c: int(np.sum(self.labels == c)) for c in (0, 1)}

    def select(self, label):
        return self.samples[self.labels == label]


def minmax_scale_file(raw):
    """Rescale a whole file array into [-1, 1] using its global min and max."""
    x = np.asarray(raw, dtype=np.float64)
    if x.size == 0:
        raise EmptyDatasetError("cannot scale an empty array")
    lo, hi = x.min(), x.max()
    if not hi > lo:
        raise DegenerateFileError(f"constant array (min == max == {lo}); scaling undefined")
    return ((x - lo) / (hi - lo) * 2 - 1).astype(np.float32)


class FileMinMaxScaler(TransformerMixin, BaseEstimator):
    """Min-max scaler over the whole array rather than per feature.

    ``fit`` records the global minimum and maximum of ``X``; ``transform``
    maps that range onto ``[-1, 1]``.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = float(X.min())
        self.data_max_ = float(X.max())
        if not self.data_max_ > self.data_min_:
            raise DegenerateFileError(f"constant array (min == max == {self.data_min_})")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        span = self.data_max_ - self.data_min_
        return ((X - self.data_min_) / span * 2 - 1).astype(np.float32)

    def inverse_transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        return (X + 1) / 2 * (self.data_max_ - self.data_min_) + self.data_min_


def read_segment_csv(path, seg_len=SEG_LEN):
    """Parse one segment CSV into a float32 matrix (unscaled)."""
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
            if not all(np.isfinite(values)):
                raise ParseError(f"{path}:{lineno}: non-finite value")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(f"{path}:{lineno}: ragged row with {len(values)} cells, expected {width}")
            rows.append(values)
    if not rows:
        raise EmptyDatasetError(f"{path}: no rows")
    if width != seg_len:
        raise ShapeError(f"{path}: rows have {width} columns, expected {seg_len}")
    return np.asarray(rows, dtype=np.float32)


def _format_real(v):
    return np.format_float_positional(v, unique=True, trim="-")


def write_segment_csv(path, samples):
    """Write float32 samples as CSV using shortest round-trip decimals, atomically."""
    samples = np.asarray(samples, dtype=np.float32)
    text = "".join(",".join(_format_real(v) for v in row) + "\n" for row in samples)
    atomic_write(path, text.encode("utf-8"))


def atomic_write(path, payload):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_dataset_dir(directory, seg_len=SEG_LEN):
    """Load every ``0_*.csv`` / ``1_*.csv`` file in ``directory``.

    Files are scaled individually and concatenated in lexicographic filename
    order. Constant files are skipped with a warning.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"data directory not found: {directory}")
    paths = sorted(
        p for p in directory.iterdir() if p.suffix == ".csv" and LABEL_PATTERN.match(p.name)
    )
    samples, labels = [], []
    for path in paths:
        raw = read_segment_csv(path, seg_len)
        try:
            scaled = minmax_scale_file(raw)
        except DegenerateFileError:
            warnings.warn(f"skipping constant file {path}", stacklevel=2)
            continue
        samples.append(scaled)
        labels.append(np.full(scaled.shape[0], int(path.name[0]), dtype=np.int64))
    if not samples:
        raise EmptyDatasetError(f"no usable segment files in {directory}")
    return Dataset(np.concatenate(samples), np.concatenate(labels), seg_len=seg_len)


def sample_real_batch(ds, batch, rng):
    """Draw ``batch`` rows uniformly with replacement, with their labels."""
    if len(ds) == 0:
        raise EmptyDatasetError("cannot sample from an empty dataset")
    if batch < 1:
        raise ConfigError(f"batch size must be positive, got {batch}")
    idx = rng.integers(0, len(ds), size=batch)
    return ds.samples[idx], ds.labels[idx]


def _toy_class(n, seg_len, freq, noise_std, rng):
    t = np.arange(seg_len)
    phase = rng.uniform(0, 2 * np.pi, size=(n, 1))
    x = np.sin(2 * np.pi * freq * t / seg_len + phase)
    if noise_std > 0:
        x = x + rng.normal(0, noise_std, size=x.shape)
    return x


def make_toy_dataset(n_per_class=500, seg_len=SEG_LEN, f0=2, f1=6, noise_std=0.1, seed=0):
    """Noisy random-phase sinusoids, one frequency per class.

    Frequencies are in cycles per segment. Each class is scaled as one file.
    """
    if n_per_class < 1 or seg_len < 2:
        raise ConfigError("n_per_class and seg_len must be positive")
    if f0 == f1:
        raise ConfigError("class frequencies must differ")
    for f in (f0, f1):
        if not 0 < f < seg_len / 2:
            raise ConfigError(f"frequency {f} must lie in (0, {seg_len / 2})")
    if noise_std < 0:
        raise ConfigError("noise_std must be non-negative")
    rng = np.random.default_rng(seed)
    parts = [minmax_scale_file(_toy_class(n_per_class, seg_len, f, noise_std, rng)) for f in (f0, f1)]
    labels = np.repeat([0, 1], n_per_class)
    return Dataset(np.concatenate(parts), labels, seg_len=seg_len)


def write_toy_dataset(ds, directory):
    """Write ``0_toy.csv`` and ``1_toy.csv``; returns the two paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for label in (0, 1):
        path = directory / f"{label}_toy.csv"
        write_segment_csv(path, ds.select(label))
        paths.append(path)
    return paths
