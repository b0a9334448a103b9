"""Dataset loading, synthetic generation and leave-one-out splitting."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence, Union

import numpy as np

from .core import RngStream

MAX_DISCRETE_LEVELS = 10


class DatasetLoadError(Exception):
    """Base class for CSV ingestion failures."""


class MissingFileError(DatasetLoadError):
    pass


class RaggedRowError(DatasetLoadError):
    pass


class NonNumericCellError(DatasetLoadError):
    pass


class MissingValueError(DatasetLoadError):
    pass


class UnknownLabelColumnError(DatasetLoadError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_kind: str
    n_class: int
    feature_names: tuple = ()
    label_names: tuple = ()

    def __post_init__(self):
        x = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if x.shape[0] != y.shape[0]:
            raise ValueError("features row count must equal labels length")
        if self.n_class < 2:
            raise ValueError("a dataset needs at least 2 classes")
        if y.size and (y.min() < 0 or y.max() >= self.n_class):
            raise ValueError("labels must lie in [0, n_class)")
        if np.isnan(x).any():
            raise ValueError("features contain missing values")
        if self.feature_kind not in ("discrete", "continuous"):
            raise ValueError(f"unknown feature_kind {self.feature_kind!r}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{i}" for i in range(x.shape[1])))
        if not self.label_names:
            object.__setattr__(self, "label_names", tuple(str(c) for c in range(self.n_class)))
        # feature-major copy used by the split kernel
        xt = np.ascontiguousarray(x.T)
        xt.flags.writeable = False
        object.__setattr__(self, "_xt", xt)

    @property
    def n_sample(self) -> int:
        return self.features.shape[0]

    @property
    def n_feature(self) -> int:
        return self.features.shape[1]

    @property
    def features_t(self) -> np.ndarray:
        return self._xt

    def select_columns(self, columns: Sequence[int]) -> "Dataset":
        columns = list(columns)
        return Dataset(
            self.features[:, columns],
            self.labels,
            self.feature_kind,
            self.n_class,
            tuple(self.feature_names[c] for c in columns),
            self.label_names,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.feature_kind == other.feature_kind
            and self.n_class == other.n_class
            and self.feature_names == other.feature_names
            and self.label_names == other.label_names
        )


def infer_feature_kind(x: np.ndarray) -> str:
    """``discrete`` iff every value is integral and no column has more than 10 levels."""
    if x.size == 0:
        return "continuous"
    if not np.all(np.floor(x) == x):
        return "continuous"
    for col in x.T:
        if np.unique(col).shape[0] > MAX_DISCRETE_LEVELS:
            return "continuous"
    return "discrete"


def load_csv(path, label_column: Union[str, int] = -1, has_header: bool = True) -> Dataset:
    """Read a labelled dataset from CSV.

    Labels are re-encoded to ``0..n_class-1`` in order of first appearance.
    ``label_column`` may be a header name or a (possibly negative) index.
    """
    if not os.path.isfile(path):
        raise MissingFileError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise RaggedRowError(f"{path}: empty file")
    header = rows[0] if has_header else None
    body = rows[1:] if has_header else rows
    width = len(rows[0])
    for i, r in enumerate(body):
        if len(r) != width:
            raise RaggedRowError(f"row {i} has {len(r)} cells, expected {width}")

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise UnknownLabelColumnError(f"label column {label_column!r} not found")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise UnknownLabelColumnError(f"label column index {label_idx} out of range")
        label_idx %= width

    feature_cols = [c for c in range(width) if c != label_idx]
    x = np.empty((len(body), len(feature_cols)), dtype=np.float64)
    raw_labels = []
    for i, r in enumerate(body):
        raw_labels.append(r[label_idx].strip())
        for j, c in enumerate(feature_cols):
            cell = r[c].strip()
            if cell == "":
                raise MissingValueError(f"missing value at ({i}, {c})")
            try:
                x[i, j] = float(cell)
            except ValueError:
                raise NonNumericCellError(f"non-numeric value {cell!r} at ({i}, {c})") from None
            if np.isnan(x[i, j]):
                raise MissingValueError(f"missing value at ({i}, {c})")

    names: dict[str, int] = {}
    for lab in raw_labels:
        names.setdefault(lab, len(names))
    if len(names) < 2:
        raise DatasetLoadError(f"{path}: label column holds fewer than 2 classes")
    y = np.array([names[lab] for lab in raw_labels], dtype=np.int64)
    feature_names = tuple(header[c] for c in feature_cols) if header else ()
    return Dataset(x, y, infer_feature_kind(x), len(names), feature_names, tuple(names))


def save_csv(dataset: Dataset, path, label_name: str = "label") -> None:
    """Write ``dataset`` so that :func:`load_csv` reads back the same value."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(dataset.feature_names) + [label_name])
        for row, lab in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [dataset.label_names[lab]])


@dataclass(frozen=True)
class SynthConfig:
    n_sample: int = 60
    n_feature: int = 200
    n_informative: int = 10
    n_class: int = 2
    noise_level: float = 1.0
    discretize_levels: Optional[int] = None

    def __post_init__(self):
        if self.n_sample < 2 or self.n_feature < 1:
            raise ValueError("need n_sample >= 2 and n_feature >= 1")
        if not 0 <= self.n_informative <= self.n_feature:
            raise ValueError("n_informative must lie in [0, n_feature]")
        if self.n_class < 2:
            raise ValueError("n_class must be >= 2")
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")
        if self.discretize_levels is not None and self.discretize_levels < 2:
            raise ValueError("discretize_levels must be >= 2")

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("synth config must be a JSON object")
        unknown = sorted(set(raw) - {f.name for f in fields(cls)})
        if unknown:
            raise ValueError(f"unknown synth config keys: {', '.join(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


def symmetric_levels(n_levels: int) -> np.ndarray:
    """Integer codes symmetric around zero with step 2, e.g. {-2, 0, 2}."""
    return 2 * np.arange(n_levels) - (n_levels - 1)


def discretize(x: np.ndarray, n_levels: int) -> np.ndarray:
    """Per-column quantile binning onto :func:`symmetric_levels`."""
    codes = symmetric_levels(n_levels).astype(np.float64)
    out = np.empty_like(x)
    qs = np.arange(1, n_levels) / n_levels
    for j in range(x.shape[1]):
        edges = np.quantile(x[:, j], qs)
        out[:, j] = codes[np.searchsorted(edges, x[:, j], side="right")]
    return out


def synth_generate(config: SynthConfig, rng: RngStream) -> Dataset:
    """Gaussian class-mean dataset; the first ``n_informative`` columns carry signal.

    Each informative column assigns every class a mean on a ladder with rung
    spacing ``2 * noise_level`` (1.0 when noise is zero); the class order on
    the ladder is shuffled per column.
    """
    g = rng.generator
    n, d, k = config.n_sample, config.n_feature, config.n_class
    y = np.arange(n) % k
    y = g.permutation(y).astype(np.int64)
    x = g.normal(0.0, config.noise_level, size=(n, d)) if config.noise_level > 0 else np.zeros((n, d))
    spacing = 2.0 * config.noise_level if config.noise_level > 0 else 1.0
    for j in range(config.n_informative):
        ladder = g.permutation(k) - (k - 1) / 2.0
        x[:, j] += spacing * ladder[y]
    kind = "continuous"
    if config.discretize_levels:
        x = discretize(x, config.discretize_levels)
        kind = infer_feature_kind(x)
    return Dataset(x, y, kind, k)


@dataclass(frozen=True)
class Split:
    train1: np.ndarray
    train2: np.ndarray
    test: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


def leave_one_out_splits(dataset: Dataset, rng: RngStream) -> list[Split]:
    """One split per row: that row is the test set, the rest alternate into train1/train2
    after a seeded shuffle (unstratified)."""
    n = dataset.n_sample
    if n < 3:
        raise ValueError(f"leave-one-out splitting needs n_sample >= 3, got {n}")
    splits = []
    everything = np.arange(n, dtype=np.int64)
    for i in range(n):
        rest = np.delete(everything, i)
        rest = rng.child(i).permutation(rest)
        splits.append(Split(np.sort(rest[0::2]), np.sort(rest[1::2]), np.array([i], dtype=np.int64)))
    return splits
