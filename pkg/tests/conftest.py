"""Shared builders for test data."""

from __future__ import annotations

import numpy as np
import pytest

from phosforge.domain import Dataset, FeatureId, FEATURE_ORDER, HeatRecord, Provenance
from phosforge.ingest import CALIBRATION_STATS, ENDPOINT_STATS


def mean_features(**overrides: float) -> dict[FeatureId, float]:
    """All features at their plant means, with keyword overrides by feature value."""
    features = {fid: CALIBRATION_STATS[fid].mean for fid in FEATURE_ORDER}
    for name, value in overrides.items():
        features[FeatureId(name)] = value
    return features


def make_record(heat_id: str = "h1", endpoint_p: float | None = ENDPOINT_STATS.mean,
                **overrides: float) -> HeatRecord:
    return HeatRecord(heat_id=heat_id, features=mean_features(**overrides), endpoint_p=endpoint_p)


def make_dataset(n: int, endpoint=None, jitter: float = 0.01, seed: int = 0, **columns) -> Dataset:
    """n records spread around the plant means.

    Every feature gets a deterministic per-record jitter (fraction of its
    std) so no column is constant; `columns` may pin one feature to an
    explicit sequence of values, and `endpoint` may be a sequence, a callable
    of the row index, or None for the plant mean.
    """
    rng = np.random.default_rng(seed)
    offsets = {fid: rng.uniform(-1.0, 1.0, n) for fid in FEATURE_ORDER}
    records = []
    for i in range(n):
        features = {}
        for fid in FEATURE_ORDER:
            stats = CALIBRATION_STATS[fid]
            features[fid] = stats.mean + jitter * stats.std * float(offsets[fid][i])
        for name, values in columns.items():
            features[FeatureId(name)] = float(values[i])
        if endpoint is None:
            p = ENDPOINT_STATS.mean
        elif callable(endpoint):
            p = float(endpoint(i))
        else:
            p = float(endpoint[i])
        records.append(HeatRecord(heat_id=f"h{i:04d}", features=features, endpoint_p=p))
    return Dataset(tuple(records), tuple(Provenance.RAW for _ in records))


@pytest.fixture
def record():
    return make_record()
