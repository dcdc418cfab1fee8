import math

import numpy as np
import pytest

from phosforge import stats
from phosforge.baselines import Forest, ForestConfig, TreeNode
from phosforge.domain import FeatureId, FEATURE_ORDER
from phosforge.metrics import (
    DEFAULT_THRESHOLDS,
    evaluate,
    hit_rate,
    mse,
    r2,
    report_to_csv,
    report_to_dict,
    rmse,
)
from phosforge.preprocess import fit_minmax, normalize_dataset

from conftest import make_dataset


def test_mse_rmse_basics():
    assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse([0.1, 0.2, 0.3], [0.0, 0.1, 0.2]) == pytest.approx(0.01, rel=1e-12)
    assert rmse([0.1, 0.2, 0.3], [0.0, 0.1, 0.2]) == pytest.approx(0.1, rel=1e-12)


def test_mse_length_checks():
    with pytest.raises(ValueError):
        mse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        mse([], [])


def test_rmse_squared_is_mse():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.normal(size=30)
        a = rng.normal(size=30)
        assert rmse(p, a) ** 2 == pytest.approx(mse(p, a), rel=1e-12)


def test_r2_perfect_and_mean_and_negative():
    y = [1.0, 2.0, 3.0]
    assert r2(y, y) == pytest.approx(1.0, abs=1e-15)
    assert r2([2.0, 2.0, 2.0], y) == pytest.approx(0.0, abs=1e-15)
    # mirrored predictor: SSres = 8, SStot = 2 -> 1 - 4 = -3
    assert r2([3.0, 2.0, 1.0], y) == pytest.approx(-3.0, rel=1e-12)


def test_r2_rejects_constant_actuals():
    with pytest.raises(ValueError):
        r2([1.0, 2.0], [5.0, 5.0])


def test_r2_is_one_iff_exact():
    y = [0.1, 0.4, 0.9, 0.3]
    assert r2(y, y) == pytest.approx(1.0, abs=1e-12)
    assert r2([0.1, 0.4, 0.9, 0.300001], y) < 1.0


def test_hit_rate_perfect_and_boundary():
    assert hit_rate([1.0, 2.0], [1.0, 2.0]) == {t: 1.0 for t in DEFAULT_THRESHOLDS}
    rates = hit_rate([0.011], [0.010])
    assert rates[0.001] == 1.0  # inclusive boundary
    below = hit_rate([0.0111], [0.010])
    assert below[0.001] == 0.0


def test_hit_rate_monotone_in_threshold():
    rng = np.random.default_rng(1)
    p = rng.normal(0.01, 0.002, 100)
    a = rng.normal(0.01, 0.002, 100)
    rates = hit_rate(p, a, [0.0005, 0.001, 0.002, 0.004, 0.008])
    ordered = [rates[t] for t in sorted(rates)]
    assert ordered == sorted(ordered)


def test_evaluate_identity_oracle():
    # endpoint is an affine map of duration, so min-max normalization makes
    # the normalized target equal the normalized duration column exactly.
    durations = [100.0 + 2.0 * i for i in range(40)]
    endpoints = [0.004 + 1e-5 * (d - 100.0) for d in durations]
    ds = make_dataset(40, duration=durations, endpoint=endpoints, seed=3)
    params = fit_minmax(ds)
    j = FEATURE_ORDER.index(FeatureId.DURATION)
    report = evaluate(lambda x: x[:, j], ds, params)
    assert report.mse == pytest.approx(0.0, abs=1e-24)
    assert report.r2 == pytest.approx(1.0, abs=1e-12)
    assert all(v == 1.0 for v in report.hit_rates.values())


def test_evaluate_mean_predictor_matches_count_oracle():
    endpoints = [0.006 + 0.0002 * (i % 7) for i in range(35)]
    ds = make_dataset(35, endpoint=endpoints, seed=4)
    params = fit_minmax(ds)
    single_leaf = Forest(
        trees=[TreeNode(value=0.5)], config=ForestConfig(n_trees=1, seed=0)
    )
    report = evaluate(single_leaf, ds, params)
    assert math.isnan(report.r)  # constant predictor leaves r undefined
    lo, hi = params.range_of("endpoint_p")
    mean_wt = 0.5 * (hi - lo) + lo
    for tau in DEFAULT_THRESHOLDS:
        expected = np.mean([abs(mean_wt - p) <= tau for p in endpoints])
        assert report.hit_rates[tau] == pytest.approx(float(expected), abs=1e-12)
    y_norm = (np.array(endpoints) - lo) / (hi - lo)
    expected_r2 = 1.0 - np.sum((0.5 - y_norm) ** 2) / np.sum((y_norm - y_norm.mean()) ** 2)
    assert report.r2 == pytest.approx(expected_r2, rel=1e-12)


def test_evaluate_r_agrees_with_stats_module():
    endpoints = [0.005 + 0.0003 * i for i in range(30)]
    ds = make_dataset(30, endpoint=endpoints, seed=5)
    params = fit_minmax(ds)
    j = FEATURE_ORDER.index(FeatureId.ENERGY)
    report = evaluate(lambda x: x[:, j], ds, params)
    x, y, _ = normalize_dataset(ds, params)
    assert report.r == pytest.approx(stats.pearson_r(x[:, j].tolist(), y.tolist()), rel=1e-12)


def test_evaluate_requires_endpoints():
    from phosforge.domain import Dataset, HeatRecord

    ds = make_dataset(10, endpoint=[0.005 + 0.001 * i for i in range(10)], seed=6)
    params = fit_minmax(ds)
    records = list(ds.records)
    records[0] = HeatRecord("h0", records[0].features, None)
    with pytest.raises(ValueError):
        evaluate(lambda x: x[:, 0], Dataset(tuple(records)), params)


def test_evaluate_rejects_unknown_model_type():
    ds = make_dataset(10, endpoint=[0.005 + 0.001 * i for i in range(10)], seed=7)
    params = fit_minmax(ds)
    with pytest.raises(TypeError):
        evaluate(object(), ds, params)


def test_report_serializers():
    endpoints = [0.005 + 0.0004 * i for i in range(20)]
    ds = make_dataset(20, endpoint=endpoints, seed=8)
    params = fit_minmax(ds)
    j = FEATURE_ORDER.index(FeatureId.DURATION)
    report = evaluate(lambda x: x[:, j], ds, params)
    doc = report_to_dict(report)
    assert doc["n"] == 20
    assert set(doc["hit_rates"]) == {repr(t) for t in DEFAULT_THRESHOLDS}
    text = report_to_csv(report)
    assert text.splitlines()[0] == "metric,value"
    assert f"hit_rate@{0.001:g}" in text
    assert math.isfinite(doc["r2"])
