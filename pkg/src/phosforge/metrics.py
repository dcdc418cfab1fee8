"""Evaluation metrics (MSE/RMSE/R2/r on the normalized scale) and hit rates (wt% scale)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import baselines, nn
from .domain import Dataset
from .preprocess import NormParams, TARGET_KEY, normalize_dataset
from .stats import pearson_r

DEFAULT_THRESHOLDS = (0.001, 0.002, 0.003, 0.004)

SCALE_NOTE = (
    "mse/rmse/r2/r computed on the min-max normalized scale; "
    "hit rates computed on the physical wt% scale"
)


def mse(pred: Sequence[float], actual: Sequence[float]) -> float:
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.size == 0:
        raise ValueError("mse needs two equal-length non-empty vectors")
    d = p - a
    return float(np.mean(d * d))


def rmse(pred: Sequence[float], actual: Sequence[float]) -> float:
    return math.sqrt(mse(pred, actual))


def r2(pred: Sequence[float], actual: Sequence[float]) -> float:
    """Coefficient of determination 1 - SSres/SStot; negative when worse than the mean."""
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.size == 0:
        raise ValueError("r2 needs two equal-length non-empty vectors")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("r2 undefined for constant actuals")
    ss_res = float(np.sum((p - a) ** 2))
    return 1.0 - ss_res / ss_tot


def hit_rate(
    pred_wtpct: Sequence[float],
    actual_wtpct: Sequence[float],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> dict[float, float]:
    """Fraction of |pred - actual| <= threshold (inclusive), per threshold, in wt%."""
    p = np.asarray(pred_wtpct, dtype=float)
    a = np.asarray(actual_wtpct, dtype=float)
    if p.shape != a.shape or p.size == 0:
        raise ValueError("hit_rate needs two equal-length non-empty vectors")
    err = np.abs(p - a)
    return {float(t): float(np.mean(err <= t)) for t in thresholds}


@dataclass(frozen=True)
class EvaluationReport:
    n: int
    mse: float
    rmse: float
    r2: float
    r: float
    hit_rates: dict[float, float]
    scale_note: str = SCALE_NOTE


Model = Union[nn.ModelArtifact, baselines.Forest, baselines.SvrModel]


def predict_normalized(model: Model, x: np.ndarray) -> np.ndarray:
    """Dispatch batch prediction in normalized space across model families.

    A bare callable (x -> predictions) is accepted too, so evaluation
    oracles and stub predictors plug straight in.
    """
    if isinstance(model, nn.ModelArtifact):
        return nn.predict_normalized(model, x)
    if isinstance(model, baselines.Forest):
        return baselines.rf_predict(model, x)
    if isinstance(model, baselines.SvrModel):
        return baselines.svr_predict(model, x)
    if callable(model):
        return np.asarray(model(x), dtype=float)
    raise TypeError(f"cannot evaluate model of type {type(model).__name__}")


def evaluate(
    model: Model,
    test_set: Dataset,
    norm_params: NormParams,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> EvaluationReport:
    """Score a trained model on a measured test set."""
    x, y, _ = normalize_dataset(test_set, norm_params)
    if y is None:
        raise ValueError("every test record needs a measured endpoint_p")
    y_hat = predict_normalized(model, x)
    lo, hi = norm_params.range_of(TARGET_KEY)
    pred_wt = y_hat * (hi - lo) + lo
    actual_wt = y * (hi - lo) + lo
    m = mse(y_hat, y)
    try:
        r = pearson_r(y_hat.tolist(), y.tolist())
    except ValueError:
        # Constant predictions leave r undefined (0/0); report it as such.
        r = math.nan
    return EvaluationReport(
        n=len(test_set),
        mse=m,
        rmse=math.sqrt(m),
        r2=r2(y_hat, y),
        r=r,
        hit_rates=hit_rate(pred_wt, actual_wt, thresholds),
    )


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "n": report.n,
        "mse": report.mse,
        "rmse": report.rmse,
        "r2": report.r2,
        "r": report.r if math.isfinite(report.r) else None,
        "hit_rates": {repr(t): v for t, v in sorted(report.hit_rates.items())},
        "scale_note": report.scale_note,
    }


def report_to_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    writer.writerow(["n", report.n])
    for name in ("mse", "rmse", "r2", "r"):
        writer.writerow([name, repr(getattr(report, name))])
    for t, v in sorted(report.hit_rates.items()):
        writer.writerow([f"hit_rate@{t:g}", repr(v)])
    writer.writerow(["scale_note", report.scale_note])
    return buf.getvalue()
