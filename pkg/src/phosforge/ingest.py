"""CSV read/write for heat datasets plus a calibrated synthetic-data generator.

The synthetic generator stands in for the proprietary plant data: feature
marginals follow the plant's published summary statistics, and the latent
end-point P function is affine in standardized features with effect signs
and relative magnitudes taken from the plant correlation analysis.
"""

from __future__ import annotations

import csv
import io
import math
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Mapping, Optional, Union

import numpy as np

from .domain import Dataset, FeatureId, FEATURE_ORDER, HeatRecord, Provenance, validate_record

FT3_TO_M3 = 0.0283168
LB_TO_KG = 0.453592


@dataclass(frozen=True)
class ColumnStats:
    """Summary statistics (plant calibration targets) for one column."""

    min: float
    max: float
    mean: float
    std: float


# Plant calibration targets: per-feature summary statistics of the cleaned
# production data the models are benchmarked against.
CALIBRATION_STATS: dict[FeatureId, ColumnStats] = {
    FeatureId.SCRAP_WEIGHT: ColumnStats(41340.0, 43708.0, 42673.0, 783.0),
    FeatureId.C_SCRAP: ColumnStats(0.058, 0.345, 0.2747, 0.0489),
    FeatureId.MN_SCRAP: ColumnStats(0.577, 3.58, 0.7980, 0.0992),
    FeatureId.CR_SCRAP: ColumnStats(0.112, 1.878, 0.7456, 0.2646),
    FeatureId.SI_SCRAP: ColumnStats(0.128, 0.79, 0.2345, 0.0362),
    FeatureId.S_SCRAP: ColumnStats(0.004, 0.08, 0.0127, 0.0033),
    FeatureId.INJECTED_OXYGEN: ColumnStats(77.87175, 289.96608, 179.0483, 29.95939),
    FeatureId.INJECTED_LIME: ColumnStats(975.224, 1950.447, 1047.79838, 256.279689),
    FeatureId.ENERGY: ColumnStats(18008.0, 23398.0, 20702.0, 941.0),
    FeatureId.DESLAG_TEMP: ColumnStats(1518.0, 1682.0, 1600.0, 55.0),
    FeatureId.TAP_TEMP: ColumnStats(1609.0, 1696.0, 1652.0, 27.0),
    FeatureId.DURATION: ColumnStats(98.0, 1355.0, 147.0, 53.0),
}

ENDPOINT_STATS = ColumnStats(0.003, 0.018, 0.0098, 0.0028)

# Standardized-effect weights of the latent end-point function, one per
# feature; signs and relative magnitudes mirror the plant correlation
# analysis (positive: duration, Cr, scrap weight, tapping T; negative:
# oxygen, S, Mn, lime, energy, deslagging T, C, Si).
DEFAULT_EFFECT_WEIGHTS: dict[FeatureId, float] = {
    FeatureId.SCRAP_WEIGHT: 0.07,
    FeatureId.C_SCRAP: -0.03,
    FeatureId.MN_SCRAP: -0.07,
    FeatureId.CR_SCRAP: 0.17,
    FeatureId.SI_SCRAP: -0.03,
    FeatureId.S_SCRAP: -0.11,
    FeatureId.INJECTED_OXYGEN: -0.18,
    FeatureId.INJECTED_LIME: -0.06,
    FeatureId.ENERGY: -0.05,
    FeatureId.DESLAG_TEMP: -0.05,
    FeatureId.TAP_TEMP: 0.005,
    FeatureId.DURATION: 0.255,
}

# Converts an effect weight into wt% P per standard deviation of a feature.
# Chosen so the latent signal is strong relative to realistic measurement
# noise while keeping the clip to [0.003, 0.018] wt% rare enough that a
# noise-free linear fit still reaches R^2 >= 0.999.
EFFECT_SCALE = 0.0078

ENDPOINT_CLIP = (0.003, 0.018)

_CSV_COLUMNS: dict[str, FeatureId] = {
    "scrap_weight_kg": FeatureId.SCRAP_WEIGHT,
    "c_scrap_wtpct": FeatureId.C_SCRAP,
    "mn_scrap_wtpct": FeatureId.MN_SCRAP,
    "cr_scrap_wtpct": FeatureId.CR_SCRAP,
    "si_scrap_wtpct": FeatureId.SI_SCRAP,
    "s_scrap_wtpct": FeatureId.S_SCRAP,
    "o2_m3": FeatureId.INJECTED_OXYGEN,
    "lime_kg": FeatureId.INJECTED_LIME,
    "energy_kwh": FeatureId.ENERGY,
    "deslag_temp_c": FeatureId.DESLAG_TEMP,
    "tap_temp_c": FeatureId.TAP_TEMP,
    "duration_min": FeatureId.DURATION,
}
# Alternate-unit columns accepted on read; values converted on ingestion.
_ALT_COLUMNS: dict[str, tuple[FeatureId, float, str]] = {
    "o2_ft3": (FeatureId.INJECTED_OXYGEN, FT3_TO_M3, "o2_m3"),
    "lime_lb": (FeatureId.INJECTED_LIME, LB_TO_KG, "lime_kg"),
}
_HEADER = ["heat_id"] + list(_CSV_COLUMNS) + ["endpoint_p_wtpct"]


class CsvHeaderError(ValueError):
    """Fatal: the CSV header is missing, incomplete, or names unknown columns."""


@dataclass(frozen=True)
class IngestError:
    """One rejected row: 1-based data-row index, offending column, and reason."""

    row: int
    column: str
    reason: str

    def __str__(self) -> str:
        return f"row {self.row}, column {self.column}: {self.reason}"


Source = Union[str, Path, IO[bytes], IO[str]]


@contextmanager
def _text_stream(source: Source, mode: str) -> Iterator[IO[str]]:
    """Yield a text stream over a path, text stream, or byte stream.

    Streams we did not open stay open; byte streams get a UTF-8 wrapper that
    is flushed and detached so the caller's stream survives.
    """
    if isinstance(source, (str, Path)):
        with open(source, mode, encoding="utf-8", newline="") as handle:
            yield handle
    elif isinstance(source, io.TextIOBase):
        yield source  # type: ignore[misc]
    else:
        wrapper = io.TextIOWrapper(source, encoding="utf-8", newline="")
        try:
            yield wrapper
        finally:
            wrapper.flush()
            wrapper.detach()


def read_csv(source: Source) -> tuple[Dataset, list[IngestError]]:
    """Parse a heat-dataset CSV.

    Every parseable, valid row becomes a raw HeatRecord in file order;
    malformed rows are reported as IngestErrors, never silently dropped.
    Alternate-unit columns (o2_ft3, lime_lb) are converted to SI on read.
    Raises CsvHeaderError when the header itself is unusable.
    """
    with _text_stream(source, "r") as stream:
        return _read_rows(csv.reader(stream))


def _read_rows(reader: Iterator[list[str]]) -> tuple[Dataset, list[IngestError]]:
    try:
        header = next(reader)
    except StopIteration:
        raise CsvHeaderError("empty file: header row missing") from None
    header = [h.strip() for h in header]

    known = {"heat_id", "endpoint_p_wtpct", *_CSV_COLUMNS, *_ALT_COLUMNS}
    unknown = [h for h in header if h not in known]
    if unknown:
        raise CsvHeaderError(f"unknown column(s): {', '.join(unknown)}")
    if "heat_id" not in header:
        raise CsvHeaderError("required column heat_id missing")
    for alt, (_, _, canonical) in _ALT_COLUMNS.items():
        if alt in header and canonical in header:
            raise CsvHeaderError(f"columns {alt} and {canonical} are mutually exclusive")
    present: dict[FeatureId, tuple[int, float]] = {}  # feature -> (col index, scale)
    for idx, name in enumerate(header):
        if name in _CSV_COLUMNS:
            present[_CSV_COLUMNS[name]] = (idx, 1.0)
        elif name in _ALT_COLUMNS:
            fid, scale, _ = _ALT_COLUMNS[name]
            present[fid] = (idx, scale)
    missing = [fid for fid in FEATURE_ORDER if fid not in present]
    if missing:
        raise CsvHeaderError(
            "required column(s) missing: " + ", ".join(f.value for f in missing)
        )
    id_idx = header.index("heat_id")
    p_idx = header.index("endpoint_p_wtpct") if "endpoint_p_wtpct" in header else None

    records: list[HeatRecord] = []
    errors: list[IngestError] = []
    seen_ids: set[str] = set()
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            errors.append(IngestError(row_no, "<row>", f"expected {len(header)} cells, got {len(row)}"))
            continue
        heat_id = row[id_idx].strip()
        if not heat_id:
            errors.append(IngestError(row_no, "heat_id", "empty heat_id"))
            continue
        if heat_id in seen_ids:
            errors.append(IngestError(row_no, "heat_id", f"duplicate heat_id {heat_id!r}"))
            continue
        features: dict[FeatureId, float] = {}
        row_error = None
        for fid in FEATURE_ORDER:
            idx, scale = present[fid]
            cell = row[idx].strip()
            try:
                features[fid] = float(cell) * scale
            except ValueError:
                row_error = IngestError(row_no, header[idx], f"not a number: {cell!r}")
                break
        if row_error is not None:
            errors.append(row_error)
            continue
        endpoint: Optional[float] = None
        if p_idx is not None and row[p_idx].strip():
            try:
                endpoint = float(row[p_idx].strip())
            except ValueError:
                errors.append(IngestError(row_no, "endpoint_p_wtpct", f"not a number: {row[p_idx]!r}"))
                continue
        record = HeatRecord(heat_id=heat_id, features=features, endpoint_p=endpoint)
        violations = validate_record(record)
        if violations:
            v = violations[0]
            errors.append(IngestError(row_no, v.field, v.rule))
            continue
        seen_ids.add(heat_id)
        records.append(record)
    return Dataset(tuple(records), tuple(Provenance.RAW for _ in records)), errors


def write_csv(dataset: Dataset, sink: Source) -> None:
    """Write a dataset in the canonical SI column layout.

    Floats are written in shortest exact decimal form, so a read-back
    reproduces every value bit-for-bit (well beyond the guaranteed 12
    significant digits). Raises ValueError on an empty dataset.
    """
    if len(dataset) == 0:
        raise ValueError("refusing to write an empty dataset")
    with _text_stream(sink, "w") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(_HEADER)
        for rec in dataset.records:
            row = [rec.heat_id]
            row += [repr(float(rec.features[fid])) for fid in FEATURE_ORDER]
            row.append("" if rec.endpoint_p is None else repr(float(rec.endpoint_p)))
            writer.writerow(row)
        stream.flush()


@dataclass(frozen=True)
class SynthConfig:
    """Configuration of the synthetic heat generator."""

    n_records: int
    noise_sd: float = 0.0002
    outlier_fraction: float = 0.05
    seed: int = 0
    coefficients: Optional[Mapping[FeatureId, float]] = None
    nonlinear: bool = False

    def __post_init__(self) -> None:
        if self.n_records < 10:
            raise ValueError("n_records must be >= 10")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if not (0.0 <= self.outlier_fraction < 0.5):
            raise ValueError("outlier_fraction must be in [0, 0.5)")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")

    def effect_weights(self) -> dict[FeatureId, float]:
        weights = dict(DEFAULT_EFFECT_WEIGHTS)
        if self.coefficients:
            weights.update(self.coefficients)
        return weights


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _norm_ppf(p: float) -> float:
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _norm_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _truncated_quartiles(a: float, b: float) -> tuple[float, float]:
    ca, cb = _norm_cdf(a), _norm_cdf(b)
    q1 = _norm_ppf(ca + 0.25 * (cb - ca))
    q3 = _norm_ppf(ca + 0.75 * (cb - ca))
    return q1, q3


def sampling_bounds(stats: ColumnStats) -> tuple[float, float]:
    """Truncation bounds used when sampling one feature.

    Starting from the plant [min, max], the bounds are contracted to the
    fixpoint of the column's own Tukey fences (plus a small margin), so the
    nominal distribution contains no box-plot outliers by construction and
    every flagged record traces back to deliberate injection.
    """
    a0 = (stats.min - stats.mean) / stats.std
    b0 = (stats.max - stats.mean) / stats.std
    a, b = a0, b0
    for _ in range(100):
        q1, q3 = _truncated_quartiles(a, b)
        iqr = q3 - q1
        new_a = max(a0, q1 - 1.5 * iqr)
        new_b = min(b0, q3 + 1.5 * iqr)
        if abs(new_a - a) < 1e-12 and abs(new_b - b) < 1e-12:
            a, b = new_a, new_b
            break
        a, b = new_a, new_b
    margin = 0.02 * (b - a)
    return stats.mean + (a + margin) * stats.std, stats.mean + (b - margin) * stats.std


def _sample_truncated(
    rng: np.random.Generator, stats: ColumnStats, lo: float, hi: float, n: int
) -> np.ndarray:
    values = rng.normal(stats.mean, stats.std, n)
    bad = (values < lo) | (values > hi)
    while bad.any():
        values[bad] = rng.normal(stats.mean, stats.std, int(bad.sum()))
        bad = (values < lo) | (values > hi)
    return values


def latent_endpoint(z: np.ndarray, weights: Mapping[FeatureId, float], nonlinear: bool) -> np.ndarray:
    """Noise-free latent end-point P (wt%) from standardized features z (n x 12)."""
    coef = np.array([weights[fid] * EFFECT_SCALE for fid in FEATURE_ORDER])
    p = ENDPOINT_STATS.mean + z @ coef
    if nonlinear:
        # Harder-tests mode: an oxygen*lime interaction and a duration
        # curvature term, each comparable to the strongest linear effects.
        i_o2 = FEATURE_ORDER.index(FeatureId.INJECTED_OXYGEN)
        i_lime = FEATURE_ORDER.index(FeatureId.INJECTED_LIME)
        i_dur = FEATURE_ORDER.index(FeatureId.DURATION)
        p = p + 0.35 * EFFECT_SCALE * z[:, i_o2] * z[:, i_lime]
        p = p + 0.25 * EFFECT_SCALE * (z[:, i_dur] ** 2 - 1.0)
    return p


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Draw a deterministic synthetic dataset calibrated to the plant statistics.

    Features come from truncated Gaussians inside the plant [min, max];
    end-point P is the latent affine function of standardized features plus
    Gaussian noise, clipped to [0.003, 0.018] wt%. An outlier_fraction of
    records then gets one feature displaced to mean + {3,5} * std, which is
    guaranteed to breach the column's Tukey fences.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.n_records
    columns: dict[FeatureId, np.ndarray] = {}
    z = np.empty((n, len(FEATURE_ORDER)))
    for j, fid in enumerate(FEATURE_ORDER):
        stats = CALIBRATION_STATS[fid]
        lo, hi = sampling_bounds(stats)
        values = _sample_truncated(rng, stats, lo, hi, n)
        columns[fid] = values
        z[:, j] = (values - stats.mean) / stats.std

    endpoint = latent_endpoint(z, config.effect_weights(), config.nonlinear)
    if config.noise_sd > 0:
        endpoint = endpoint + rng.normal(0.0, config.noise_sd, n)
    endpoint = np.clip(endpoint, ENDPOINT_CLIP[0], ENDPOINT_CLIP[1])

    n_out = int(round(config.outlier_fraction * n))
    if n_out:
        out_idx = rng.choice(n, size=n_out, replace=False)
        out_feat = rng.integers(0, len(FEATURE_ORDER), size=n_out)
        out_factor = rng.choice(np.array([3.0, 5.0]), size=n_out)
        for idx, fj, factor in zip(out_idx, out_feat, out_factor):
            fid = FEATURE_ORDER[int(fj)]
            stats = CALIBRATION_STATS[fid]
            columns[fid][int(idx)] = stats.mean + factor * stats.std

    width = len(str(n))
    records = []
    for i in range(n):
        features = {fid: float(columns[fid][i]) for fid in FEATURE_ORDER}
        records.append(
            HeatRecord(
                heat_id=f"synth-{i + 1:0{width}d}",
                features=features,
                endpoint_p=float(endpoint[i]),
            )
        )
    return Dataset(tuple(records), tuple(Provenance.SYNTHETIC for _ in records))
