"""Pearson correlation, Student-t p-values, and the per-feature significance report."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .domain import Dataset, FeatureId, FEATURE_ORDER

# Floor for the Lentz continued-fraction denominators; keeps the recurrence
# from collapsing to zero without perturbing converged results.
_LENTZ_FLOOR = 1e-300
_LENTZ_EPS = 1e-15
_LENTZ_MAX_ITER = 500


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape} vs {ya.shape}")
    if xa.size < 3:
        raise ValueError("need at least 3 points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    return float(np.sum(dx * dy) / (sx * sy))


def t_statistic(r: float, n: int) -> float:
    """t = r*sqrt(n-2)/sqrt(1-r^2), the test statistic for zero correlation."""
    if n < 3:
        raise ValueError("need n >= 3")
    if abs(r) >= 1.0:
        raise ValueError("|r| = 1 gives an infinite t statistic")
    return r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_FLOOR:
        d = _LENTZ_FLOOR
    d = 1.0 / d
    h = d
    for m in range(1, _LENTZ_MAX_ITER + 1):
        m2 = 2 * m
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < _LENTZ_FLOOR:
            d = _LENTZ_FLOOR
        c = 1.0 + coeff / c
        if abs(c) < _LENTZ_FLOOR:
            c = _LENTZ_FLOOR
        d = 1.0 / d
        h *= d * c
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < _LENTZ_FLOOR:
            d = _LENTZ_FLOOR
        c = 1.0 + coeff / c
        if abs(c) < _LENTZ_FLOOR:
            c = _LENTZ_FLOOR
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def p_value(r: float, n: int) -> float:
    """Two-sided tail probability of Student's t with n-2 degrees of freedom."""
    t = t_statistic(r, n)
    nu = n - 2
    if t == 0.0:
        return 1.0
    x = nu / (nu + t * t)
    return regularized_incomplete_beta(nu / 2.0, 0.5, x)


class Significance(str, Enum):
    VERY_SIGNIFICANT = "very_significant"
    SIGNIFICANT = "significant"
    NOT_SIGNIFICANT = "not_significant"

    @classmethod
    def from_p(cls, p: float) -> "Significance":
        if p < 0.01:
            return cls.VERY_SIGNIFICANT
        if p < 0.05:
            return cls.SIGNIFICANT
        return cls.NOT_SIGNIFICANT

    @property
    def stars(self) -> str:
        return {"very_significant": "**", "significant": "*", "not_significant": ""}[self.value]


@dataclass(frozen=True)
class CorrelationEntry:
    feature: FeatureId
    r: float
    t: float
    p: float
    significance: Significance


@dataclass(frozen=True)
class CorrelationReport:
    n: int
    entries: tuple[CorrelationEntry, ...]

    def entry_for(self, feature: FeatureId) -> CorrelationEntry:
        for entry in self.entries:
            if entry.feature is feature:
                return entry
        raise KeyError(feature)


def correlation_report(dataset: Dataset) -> CorrelationReport:
    """Per-feature correlation against endpoint_p, sorted strongest first."""
    endpoints = dataset.endpoints()
    if any(p is None for p in endpoints):
        raise ValueError("every record needs a measured endpoint_p")
    n = len(dataset)
    if n < 3:
        raise ValueError("need at least 3 records")
    y = [float(p) for p in endpoints]  # type: ignore[arg-type]
    entries = []
    for fid in FEATURE_ORDER:
        x = [rec.features[fid] for rec in dataset.records]
        r = pearson_r(x, y)
        if abs(r) >= 1.0 - 1e-15:
            t = math.copysign(math.inf, r)
            p = 0.0
        else:
            t = t_statistic(r, n)
            p = p_value(r, n)
        entries.append(CorrelationEntry(fid, r, t, p, Significance.from_p(p)))
    entries.sort(key=lambda e: -abs(e.r))
    return CorrelationReport(n=n, entries=tuple(entries))


def report_to_csv(report: CorrelationReport) -> str:
    """Render the report as CSV with the star convention (* p<0.05, ** p<0.01)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["feature", "r", "t", "p", "stars"])
    for e in report.entries:
        writer.writerow([e.feature.value, repr(e.r), repr(e.t), repr(e.p), e.significance.stars])
    return buf.getvalue()
