"""Tabular expression data: CSV ingestion, standardization and stratified splits."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateClass,
    DimensionMismatch,
    EmptyDataset,
    InvalidFraction,
    IoError,
    MissingColumn,
    ParseError,
)

log = logging.getLogger(__name__)

DEFAULT_MISSING = ("", "na", "nan", "null")
CONSTANT_STD = 1e-12


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    ids: tuple
    feature_names: tuple
    x: np.ndarray
    y: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))
        x = _frozen(self.x, np.float64)
        y = _frozen(self.y, np.int64)
        if x.ndim != 2:
            raise DimensionMismatch(f"x must be 2-D, got shape {x.shape}")
        n, d = x.shape
        if len(self.ids) != n or y.shape != (n,):
            raise DimensionMismatch(
                f"{n} rows but {len(self.ids)} ids and {y.shape[0] if y.ndim else 0} labels")
        if len(self.feature_names) != d:
            raise DimensionMismatch(f"{d} columns but {len(self.feature_names)} feature names")
        if not np.all(np.isfinite(x)):
            raise ValueError("x contains non-finite values")
        if n and not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset([self.ids[i] for i in rows], self.feature_names,
                       self.x[rows], self.y[rows])

    def with_x(self, x) -> "Dataset":
        return Dataset(self.ids, self.feature_names, x, self.y, self.n_dropped)


@dataclass(frozen=True)
class CsvSchema:
    label_col: str = "label"
    id_col: str | None = "id"
    missing: Sequence[str] = DEFAULT_MISSING


def _is_missing(cell, missing):
    return cell.strip().lower() in missing


def load_csv(path, schema: CsvSchema | None = None) -> Dataset:
    """Read a comma-delimited table with a header row.

    Rows with a missing token in any feature or label cell are dropped; the
    number of dropped rows is kept on ``Dataset.n_dropped``. Rows are counted
    from 1, excluding the header, when reporting parse errors.
    """
    schema = schema or CsvSchema()
    missing = {m.strip().lower() for m in schema.missing}
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path} has no header row") from None
        if schema.label_col not in header:
            raise MissingColumn(f"label column {schema.label_col!r} not in header")
        if schema.id_col is not None and schema.id_col not in header:
            raise MissingColumn(f"id column {schema.id_col!r} not in header")

        label_at = header.index(schema.label_col)
        id_at = header.index(schema.id_col) if schema.id_col is not None else None
        feat_at = [j for j in range(len(header)) if j not in (label_at, id_at)]
        names = [header[j] for j in feat_at]

        ids, rows, labels = [], [], []
        n_raw = 0
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            n_raw += 1
            if len(row) != len(header):
                raise ParseError(f"row {row_no}: expected {len(header)} cells, got {len(row)}",
                                 row=row_no)
            if any(_is_missing(row[j], missing) for j in feat_at + [label_at]):
                continue
            values = []
            for j in feat_at:
                try:
                    v = float(row[j])
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise ParseError(f"row {row_no}, column {header[j]}: "
                                     f"cannot parse {row[j]!r} as a number",
                                     row=row_no, column=header[j])
                values.append(v)
            try:
                lab = float(row[label_at])
            except ValueError:
                lab = math.nan
            if lab not in (0.0, 1.0):
                raise ParseError(f"row {row_no}, column {schema.label_col}: "
                                 f"label must be 0 or 1, got {row[label_at]!r}",
                                 row=row_no, column=schema.label_col)
            ids.append(row[id_at].strip() if id_at is not None else f"row{row_no}")
            rows.append(values)
            labels.append(int(lab))

    dropped = n_raw - len(rows)
    if dropped:
        log.info("dropped %d of %d rows with missing values", dropped, n_raw)
    if not rows:
        raise EmptyDataset(f"no rows left in {path} after dropping missing values")
    x = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return Dataset(ids, names, x, labels, n_dropped=dropped)


def write_csv(data: Dataset, path, label_col="label", id_col="id"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([id_col, *data.feature_names, label_col])
        for i in range(data.n):
            w.writerow([data.ids[i], *(repr(float(v)) for v in data.x[i]), int(data.y[i])])


# -- scaling ------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray
    constant: np.ndarray = field(default=None)

    def __post_init__(self):
        means = _frozen(self.means, np.float64)
        stds = _frozen(self.stds, np.float64)
        if means.shape != stds.shape or means.ndim != 1:
            raise DimensionMismatch("means and stds must be vectors of equal length")
        if np.any(stds < 0):
            raise ValueError("standard deviations must be non-negative")
        const = self.constant
        if const is None:
            const = stds < CONSTANT_STD
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "constant", _frozen(const, bool))

    @property
    def d(self):
        return self.means.shape[0]


def fit_scaler(train_x) -> ScalerParams:
    x = np.asarray(train_x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("cannot fit a scaler on zero rows")
    return ScalerParams(x.mean(axis=0), x.std(axis=0))


def apply_scaler(params: ScalerParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.d:
        raise DimensionMismatch(f"scaler expects {params.d} columns, got shape {x.shape}")
    safe = np.where(params.constant, 1.0, params.stds)
    out = (x - params.means) / safe
    out[:, params.constant] = 0.0
    return out


# -- splitting ----------------------------------------------------------

@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float
    train_rows: np.ndarray
    test_rows: np.ndarray


def _round_half_up(v):
    return int(math.floor(v + 0.5))


def split(data: Dataset, test_fraction: float, seed: int) -> SplitResult:
    """Stratified train/test split.

    Within each class (0 first, then 1) the row indices are permuted by a
    PCG64 generator seeded with ``seed``; the first
    ``round(count * test_fraction)`` go to the test side. Both partitions keep
    the original row order.
    """
    if not (0.0 < test_fraction < 1.0):
        raise InvalidFraction(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_rows = []
    for cls in (0, 1):
        members = np.flatnonzero(data.y == cls)
        n_test = _round_half_up(members.size * test_fraction)
        if members.size == 0:
            raise DegenerateClass(f"class {cls} has no rows")
        if n_test == 0 or n_test == members.size:
            raise DegenerateClass(
                f"class {cls} with {members.size} rows leaves an empty partition "
                f"at test_fraction={test_fraction}")
        test_rows.append(rng.permutation(members)[:n_test])
    test_rows = np.sort(np.concatenate(test_rows))
    mask = np.zeros(data.n, dtype=bool)
    mask[test_rows] = True
    train_rows = np.flatnonzero(~mask)
    return SplitResult(data.take(train_rows), data.take(test_rows), seed,
                       test_fraction, train_rows, test_rows)
