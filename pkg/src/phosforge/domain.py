"""Canonical data model for furnace heats: features, units, records, datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence


class FeatureId(str, Enum):
    """The 12 input features of a heat, in fixed canonical order.

    The declaration order below is the one and only ordering used for
    vectorization, persistence, and the HTTP API.
    """

    SCRAP_WEIGHT = "scrap_weight"
    C_SCRAP = "c_scrap"
    MN_SCRAP = "mn_scrap"
    CR_SCRAP = "cr_scrap"
    SI_SCRAP = "si_scrap"
    S_SCRAP = "s_scrap"
    INJECTED_OXYGEN = "injected_oxygen"
    INJECTED_LIME = "injected_lime"
    ENERGY = "energy"
    DESLAG_TEMP = "deslag_temp"
    TAP_TEMP = "tap_temp"
    DURATION = "duration"

    @property
    def unit(self) -> str:
        return _FEATURE_UNITS[self]

    @property
    def label(self) -> str:
        return _FEATURE_LABELS[self]


FEATURE_ORDER: tuple[FeatureId, ...] = tuple(FeatureId)

_FEATURE_UNITS: dict[FeatureId, str] = {
    FeatureId.SCRAP_WEIGHT: "kg",
    FeatureId.C_SCRAP: "wt%",
    FeatureId.MN_SCRAP: "wt%",
    FeatureId.CR_SCRAP: "wt%",
    FeatureId.SI_SCRAP: "wt%",
    FeatureId.S_SCRAP: "wt%",
    FeatureId.INJECTED_OXYGEN: "m3",
    FeatureId.INJECTED_LIME: "kg",
    FeatureId.ENERGY: "kWh",
    FeatureId.DESLAG_TEMP: "degC",
    FeatureId.TAP_TEMP: "degC",
    FeatureId.DURATION: "min",
}

_FEATURE_LABELS: dict[FeatureId, str] = {
    FeatureId.SCRAP_WEIGHT: "Scrap weight",
    FeatureId.C_SCRAP: "C content in scrap",
    FeatureId.MN_SCRAP: "Mn content in scrap",
    FeatureId.CR_SCRAP: "Cr content in scrap",
    FeatureId.SI_SCRAP: "Si content in scrap",
    FeatureId.S_SCRAP: "S content in scrap",
    FeatureId.INJECTED_OXYGEN: "Injected oxygen",
    FeatureId.INJECTED_LIME: "Injected lime",
    FeatureId.ENERGY: "Energy consumption",
    FeatureId.DESLAG_TEMP: "Deslagging temperature",
    FeatureId.TAP_TEMP: "Tapping temperature",
    FeatureId.DURATION: "Process duration",
}

# Sanity bands for record validation. The temperature band is deliberately
# generous around observed plant practice so that unit mix-ups (degF, K)
# are rejected early without rejecting unusual-but-real heats.
TEMPERATURE_FEATURES = (FeatureId.DESLAG_TEMP, FeatureId.TAP_TEMP)
TEMP_BAND_C = (1000.0, 2000.0)
# Upper sanity bound for measured end-point P, an order of magnitude above
# anything a real heat produces; catches percent/ppm confusion.
ENDPOINT_P_MAX = 0.1


class Provenance(str, Enum):
    """How a record entered a dataset."""

    RAW = "raw"
    CLEANED = "cleaned"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class Violation:
    """One failed validation rule on a record."""

    field: str
    value: object
    rule: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r}: {self.rule}"


@dataclass(frozen=True)
class HeatRecord:
    """One furnace heat: 12 input features plus optional measured end-point P (wt%)."""

    heat_id: str
    features: Mapping[FeatureId, float]
    endpoint_p: Optional[float] = None

    def __post_init__(self) -> None:
        # Defensive copy so shared records cannot be mutated through the map.
        object.__setattr__(self, "features", dict(self.features))


def validate_record(record: HeatRecord) -> list[Violation]:
    """Check a record against the domain invariants.

    Returns an empty list iff the record is valid; violations name the
    offending field, its value, and the rule it broke.
    """
    violations: list[Violation] = []
    for fid in FEATURE_ORDER:
        if fid not in record.features:
            violations.append(Violation(fid.value, None, "feature missing"))
            continue
        value = record.features[fid]
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            violations.append(Violation(fid.value, value, "not a finite number"))
            continue
        if value < 0:
            violations.append(Violation(fid.value, value, "must be >= 0"))
        if fid in TEMPERATURE_FEATURES and not (TEMP_BAND_C[0] < value < TEMP_BAND_C[1]):
            violations.append(
                Violation(
                    fid.value,
                    value,
                    f"temperature outside sanity band ({TEMP_BAND_C[0]:g}, {TEMP_BAND_C[1]:g}) degC",
                )
            )
    unknown = set(record.features) - set(FEATURE_ORDER)
    for extra in sorted(str(k) for k in unknown):
        violations.append(Violation(extra, record.features[extra], "unknown feature"))  # type: ignore[index]
    p = record.endpoint_p
    if p is not None:
        if not math.isfinite(p):
            violations.append(Violation("endpoint_p", p, "not a finite number"))
        elif not (0.0 <= p <= ENDPOINT_P_MAX):
            violations.append(
                Violation("endpoint_p", p, f"outside [0, {ENDPOINT_P_MAX:g}] wt%")
            )
    return violations


def feature_vector(record: HeatRecord) -> list[float]:
    """Project a record onto the canonical 12-vector (FeatureId order)."""
    return [float(record.features[fid]) for fid in FEATURE_ORDER]


def record_from_vector(
    heat_id: str,
    vector: Sequence[float],
    endpoint_p: Optional[float] = None,
) -> HeatRecord:
    """Inverse of feature_vector, modulo heat_id and endpoint."""
    if len(vector) != len(FEATURE_ORDER):
        raise ValueError(f"expected {len(FEATURE_ORDER)} values, got {len(vector)}")
    features = {fid: float(v) for fid, v in zip(FEATURE_ORDER, vector)}
    return HeatRecord(heat_id=heat_id, features=features, endpoint_p=endpoint_p)


class DatasetError(ValueError):
    """Raised when a dataset would violate its structural invariants."""


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of heats with per-record provenance."""

    records: tuple[HeatRecord, ...]
    provenance: tuple[Provenance, ...] = field(default=())

    def __post_init__(self) -> None:
        records = tuple(self.records)
        provenance = tuple(self.provenance)
        if not provenance:
            provenance = tuple(Provenance.RAW for _ in records)
        if len(provenance) != len(records):
            raise DatasetError("provenance flags must match record count")
        seen: set[str] = set()
        for rec in records:
            if rec.heat_id in seen:
                raise DatasetError(f"duplicate heat_id {rec.heat_id!r}")
            seen.add(rec.heat_id)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "provenance", provenance)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterable[HeatRecord]:
        return iter(self.records)

    def with_provenance(self, flag: Provenance) -> "Dataset":
        return Dataset(self.records, tuple(flag for _ in self.records))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(
            tuple(self.records[i] for i in indices),
            tuple(self.provenance[i] for i in indices),
        )

    def endpoints(self) -> list[Optional[float]]:
        return [rec.endpoint_p for rec in self.records]
