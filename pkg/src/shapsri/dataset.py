"""Observation matrices: CSV loading, the synthetic duplicated-feature
dataset, and background sampling for marginal expectations.

Random numbers come from numpy's PCG64 bit generator
(``numpy.random.default_rng(seed)``), which is stable across platforms and
numpy releases for the ``random`` and ``choice`` calls used here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SEED_MAX = 2**64 - 1

# the duplicated-feature benchmark model; x3 is an exact copy of x2
BENCHMARK_MODEL = "sin(2*pi*x1) * sin(2*pi*(x2+x3)/2) + x4 + x5"


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    values: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"dataset must be a non-empty 2-D matrix, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("dataset contains non-finite values")
        values.setflags(write=False)
        names = self.feature_names
        if names is None:
            names = default_feature_names(values.shape[1])
        names = tuple(str(n) for n in names)
        if len(names) != values.shape[1]:
            raise DataError(f"{len(names)} feature names for {values.shape[1]} columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", names)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_observations(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]

    def __len__(self):
        return self.values.shape[0]


# rows come from a Dataset unchanged, so a background is a Dataset too
BackgroundSet = Dataset


def default_feature_names(n):
    return tuple(f"x{i}" for i in range(1, n + 1))


def check_seed(seed):
    """Validate an unsigned 64-bit seed and return it as ``int``."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DataError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise DataError(f"seed must lie in [0, 2**64 - 1], got {seed}")
    return seed


def load_csv(path, has_header=False):
    """Read a rectangular numeric CSV file into a :class:`Dataset`.

    Rows and columns in error messages are 1-based and count data rows only,
    so the header (if any) is not row 1.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    names = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: no header row")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no rows")

    width = len(names) if names is not None else len(rows[0])
    values = np.empty((len(rows), width))
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}: row {r} has {len(row)} columns, expected {width}")
        for c, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell.strip()!r} at row {r}, column {c}"
                ) from None
            if not np.isfinite(v):
                raise DataError(f"{path}: non-finite cell at row {r}, column {c}")
            values[r - 1, c - 1] = v
    return Dataset(values, names)


def generate_benchmark_dataset(m, seed):
    """Five features on [0, 1): x1, x2, x4, x5 i.i.d. uniform and x3 = x2.

    Draws an (m, 4) block from PCG64 in row-major order; its columns become
    x1, x2, x4, x5 and x3 is a bitwise copy of x2.
    """
    m = int(m)
    if m < 1:
        raise DataError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(check_seed(seed))
    draws = rng.random((m, 4))
    values = np.column_stack([draws[:, 0], draws[:, 1], draws[:, 1], draws[:, 2], draws[:, 3]])
    return Dataset(values, default_feature_names(5))


def sample_background(data, k, seed):
    """Pick ``k`` whole rows of ``data`` without replacement.

    Rows are never recombined column-wise, so exact feature duplicates in the
    data stay duplicated in the background.  Selected rows keep their
    original relative order; ``k == m`` returns ``data`` itself.
    """
    k = int(k)
    m = data.n_observations
    if not 1 <= k <= m:
        raise DataError(f"background size must lie in [1, {m}], got {k}")
    if k == m:
        return data
    rng = np.random.default_rng(check_seed(seed))
    idx = np.sort(rng.choice(m, size=k, replace=False))
    return Dataset(data.values[idx], data.feature_names)


# operation name used by external callers
generate_paper_dataset = generate_benchmark_dataset
