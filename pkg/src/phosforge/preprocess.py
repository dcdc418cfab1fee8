"""Outlier removal via box-plot fences, min-max normalization, seeded splits."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .domain import Dataset, FeatureId, FEATURE_ORDER, Provenance

TARGET_KEY = "endpoint_p"
TUKEY_K = 1.5


@dataclass(frozen=True)
class Quartiles:
    q1: float
    q2: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def fences(self) -> tuple[float, float]:
        return (self.q1 - TUKEY_K * self.iqr, self.q3 + TUKEY_K * self.iqr)


def quartiles(values: Sequence[float]) -> Quartiles:
    """Q1/Q2/Q3 by linear interpolation at plotting position h = (n-1)*p."""
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or data.size < 4:
        raise ValueError("quartiles need at least 4 values")
    if not np.isfinite(data).all():
        raise ValueError("quartiles need finite values")
    ordered = np.sort(data)
    n = ordered.size

    def at(p: float) -> float:
        h = (n - 1) * p
        lo = int(np.floor(h))
        hi = min(lo + 1, n - 1)
        return float(ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo]))

    return Quartiles(at(0.25), at(0.5), at(0.75))


def _column_matrix(dataset: Dataset) -> np.ndarray:
    """13-column matrix (12 features + target); errors if any endpoint missing."""
    rows = []
    for rec in dataset.records:
        if rec.endpoint_p is None:
            raise ValueError(f"record {rec.heat_id!r} has no measured endpoint_p")
        rows.append([rec.features[fid] for fid in FEATURE_ORDER] + [rec.endpoint_p])
    return np.array(rows, dtype=float)


def detect_outliers(dataset: Dataset) -> list[bool]:
    """Mark records with any of their 13 values strictly outside the Tukey fences.

    Fences are computed per column over the full input dataset; a value
    exactly on a fence is inside.
    """
    if len(dataset) < 4:
        raise ValueError("outlier detection needs at least 4 records")
    matrix = _column_matrix(dataset)
    mask = np.zeros(len(dataset), dtype=bool)
    for col in range(matrix.shape[1]):
        q = quartiles(matrix[:, col])
        lo, hi = q.fences
        mask |= (matrix[:, col] < lo) | (matrix[:, col] > hi)
    return mask.tolist()


def remove_outliers(dataset: Dataset) -> tuple[Dataset, int]:
    """Single-pass cleaning: fences from the raw data, applied once.

    Survivors are flagged cleaned; input order is preserved. Not idempotent
    in general, since fences shift once outliers are gone.
    """
    mask = detect_outliers(dataset)
    keep = [i for i, flagged in enumerate(mask) if not flagged]
    survivors = dataset.subset(keep)
    return survivors.with_provenance(Provenance.CLEANED), len(dataset) - len(keep)


NormKey = Union[FeatureId, str]


@dataclass(frozen=True)
class NormParams:
    """Per-column min/max fitted on training data, for [0,1] scaling and inversion."""

    columns: dict[NormKey, tuple[float, float]]
    fitted_on: str

    def range_of(self, key: NormKey) -> tuple[float, float]:
        return self.columns[key]

    @property
    def has_target(self) -> bool:
        return TARGET_KEY in self.columns


def dataset_fingerprint(dataset: Dataset) -> str:
    """Deterministic digest of record ids and values."""
    h = hashlib.sha256()
    for rec in dataset.records:
        h.update(rec.heat_id.encode())
        for fid in FEATURE_ORDER:
            h.update(repr(rec.features[fid]).encode())
        h.update(repr(rec.endpoint_p).encode())
    return h.hexdigest()


def fit_minmax(dataset: Dataset) -> NormParams:
    """Per-column min/max over the given dataset only.

    The target column is fitted when every record carries endpoint_p.
    A constant column cannot be scaled to [0,1] and raises ValueError.
    """
    if len(dataset) == 0:
        raise ValueError("cannot fit normalization on an empty dataset")
    columns: dict[NormKey, tuple[float, float]] = {}
    for fid in FEATURE_ORDER:
        values = [rec.features[fid] for rec in dataset.records]
        lo, hi = min(values), max(values)
        if hi <= lo:
            raise ValueError(f"feature {fid.value} is constant; cannot min-max scale")
        columns[fid] = (lo, hi)
    endpoints = dataset.endpoints()
    if all(p is not None for p in endpoints):
        lo, hi = min(endpoints), max(endpoints)  # type: ignore[type-var]
        if hi <= lo:
            raise ValueError("target endpoint_p is constant; cannot min-max scale")
        columns[TARGET_KEY] = (float(lo), float(hi))
    return NormParams(columns=columns, fitted_on=dataset_fingerprint(dataset))


def normalize_value(x: float, key: NormKey, params: NormParams) -> float:
    lo, hi = params.range_of(key)
    return (x - lo) / (hi - lo)


def denormalize(z: float, key: NormKey, params: NormParams) -> float:
    lo, hi = params.range_of(key)
    return z * (hi - lo) + lo


def normalize_record(
    features: Sequence[float], params: NormParams
) -> tuple[np.ndarray, list[FeatureId]]:
    """Scale a 12-vector into fitted space.

    Values outside the fitted range map outside [0,1] on purpose (no
    clamping); the second return value lists the offending features so the
    caller can surface a warning instead of silently hiding sensor drift.
    """
    z = np.empty(len(FEATURE_ORDER))
    out_of_range: list[FeatureId] = []
    for j, fid in enumerate(FEATURE_ORDER):
        z[j] = normalize_value(float(features[j]), fid, params)
        if not (0.0 <= z[j] <= 1.0):
            out_of_range.append(fid)
    return z, out_of_range


def normalize_dataset(
    dataset: Dataset, params: NormParams
) -> tuple[np.ndarray, Optional[np.ndarray], list[list[FeatureId]]]:
    """Matrix form of normalize_record over a dataset.

    Returns (X, y, warnings): X is n x 12, y is the normalized target or
    None when any record lacks endpoint_p, warnings holds the out-of-range
    features per record.
    """
    X = np.empty((len(dataset), len(FEATURE_ORDER)))
    warnings: list[list[FeatureId]] = []
    for i, rec in enumerate(dataset.records):
        X[i], flagged = normalize_record([rec.features[f] for f in FEATURE_ORDER], params)
        warnings.append(flagged)
    y: Optional[np.ndarray] = None
    endpoints = dataset.endpoints()
    if params.has_target and all(p is not None for p in endpoints):
        lo, hi = params.range_of(TARGET_KEY)
        y = (np.array(endpoints, dtype=float) - lo) / (hi - lo)
    return X, y, warnings


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    val_fraction: float
    test_fraction: float
    seed: int

    def __post_init__(self) -> None:
        total = self.train_fraction + self.val_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")
        if min(self.train_fraction, self.val_fraction, self.test_fraction) < 0:
            raise ValueError("fractions must be >= 0")
        if self.test_fraction <= 0:
            raise ValueError("test_fraction must be > 0")


def fisher_yates(n: int, rng: np.random.Generator) -> list[int]:
    """In-place Fisher-Yates permutation of range(n) driven by rng."""
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded Fisher-Yates shuffle, then contiguous train/val/test slices.

    Val and test sizes are floors of their fractions; the remainder goes to
    train. The three parts partition the input and are deterministic per seed.
    """
    n = len(dataset)
    if n < 10:
        raise ValueError("need at least 10 records to split")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    order = fisher_yates(n, rng)
    # epsilon keeps exact products like 10 * 0.3 = 2.999... from flooring low
    n_val = int(n * spec.val_fraction + 1e-9)
    n_test = int(n * spec.test_fraction + 1e-9)
    n_train = n - n_val - n_test
    train = dataset.subset(order[:n_train])
    val = dataset.subset(order[n_train : n_train + n_val])
    test = dataset.subset(order[n_train + n_val :])
    return train, val, test
