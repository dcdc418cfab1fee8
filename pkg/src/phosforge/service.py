"""HTTP prediction service for the operator console.

One immutable model per process; every response is a pure function of the
model file and the request body. Schema violations return 400 with
per-field messages, domain-invariant violations return 422, and 500s never
leak internals.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, field_validator

from .domain import FeatureId, FEATURE_ORDER, HeatRecord, Violation, validate_record
from .nn import ModelArtifact, predict
from .persist import load_model

FEATURE_NAMES = [f.value for f in FEATURE_ORDER]


class PredictRequest(BaseModel):
    features: dict[str, float]

    @field_validator("features")
    @classmethod
    def check_feature_names(cls, value: dict[str, float]) -> dict[str, float]:
        unknown = sorted(set(value) - set(FEATURE_NAMES))
        if unknown:
            raise ValueError(f"unknown feature(s): {', '.join(unknown)}")
        missing = [name for name in FEATURE_NAMES if name not in value]
        if missing:
            raise ValueError(f"missing feature(s): {', '.join(missing)}")
        return value


class Override(BaseModel):
    feature: str
    value: float

    @field_validator("feature")
    @classmethod
    def check_feature(cls, value: str) -> str:
        if value not in FEATURE_NAMES:
            raise ValueError(f"unknown feature: {value}")
        return value


class WhatIfRequest(BaseModel):
    base: PredictRequest
    overrides: list[Override] = []


class PredictResponse(BaseModel):
    p_wtpct: float
    p_ppm: float
    out_of_range: list[str]


class WhatIfEntry(BaseModel):
    applied_override: Optional[Override]
    p_wtpct: float
    delta_wtpct: float


class ModelInfo(BaseModel):
    format: str
    architecture: dict
    metadata: dict
    norm_ranges: dict[str, tuple[float, float]]
    features: list[dict]


class DomainViolationError(Exception):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _record_from_features(features: dict[str, float]) -> HeatRecord:
    record = HeatRecord(
        heat_id="request",
        features={FeatureId(name): float(v) for name, v in features.items()},
        endpoint_p=None,
    )
    violations = validate_record(record)
    if violations:
        raise DomainViolationError(violations)
    return record


def create_app(artifact: ModelArtifact) -> FastAPI:
    """Build the service around one read-only model artifact."""
    app = FastAPI(title="phosforge", version="1")

    @app.exception_handler(RequestValidationError)
    async def on_schema_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": "invalid request", "errors": errors})

    @app.exception_handler(DomainViolationError)
    async def on_domain_error(request: Request, exc: DomainViolationError) -> JSONResponse:
        errors = [
            {"field": v.field, "value": v.value if isinstance(v.value, (int, float, str)) else None,
             "message": v.rule}
            for v in exc.violations
        ]
        return JSONResponse(status_code=422, content={"detail": "domain invariant violated", "errors": errors})

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=500, content={"detail": "internal error"})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/v1/model", response_model=ModelInfo)
    def model_info() -> ModelInfo:
        arch = artifact.architecture
        ranges = {}
        for key, (lo, hi) in artifact.norm_params.columns.items():
            name = key.value if isinstance(key, FeatureId) else str(key)
            ranges[name] = (lo, hi)
        return ModelInfo(
            format=artifact.metadata.format_version,
            architecture={
                "input_dim": arch.input_dim,
                "hidden": list(arch.hidden),
                "output_dim": arch.output_dim,
                "activation": arch.activation,
            },
            metadata={
                "data_fingerprint": artifact.metadata.data_fingerprint,
                "epochs": artifact.metadata.train_config.epochs,
                "batch_size": artifact.metadata.train_config.batch_size,
                "learning_rate": artifact.metadata.train_config.learning_rate,
                "seed": artifact.metadata.train_config.seed,
            },
            norm_ranges=ranges,
            features=[{"name": f.value, "unit": f.unit, "label": f.label} for f in FEATURE_ORDER],
        )

    @app.post("/v1/predict", response_model=PredictResponse)
    def predict_endpoint(request: PredictRequest) -> PredictResponse:
        record = _record_from_features(request.features)
        result = predict(artifact, record)
        return PredictResponse(
            p_wtpct=result.p_wtpct,
            p_ppm=result.p_ppm,
            out_of_range=[f.value for f in result.out_of_range],
        )

    @app.post("/v1/whatif", response_model=list[WhatIfEntry])
    def whatif_endpoint(request: WhatIfRequest) -> list[WhatIfEntry]:
        base_record = _record_from_features(request.base.features)
        base_p = predict(artifact, base_record).p_wtpct
        if not request.overrides:
            return [WhatIfEntry(applied_override=None, p_wtpct=base_p, delta_wtpct=0.0)]
        entries = []
        for override in request.overrides:
            features = dict(request.base.features)
            features[override.feature] = override.value
            record = _record_from_features(features)
            p = predict(artifact, record).p_wtpct
            entries.append(
                WhatIfEntry(applied_override=override, p_wtpct=p, delta_wtpct=p - base_p)
            )
        return entries

    return app


def load_app(model_path: Union[str, Path]) -> FastAPI:
    """Load a network model file and wrap it in the service."""
    loaded = load_model(model_path)
    if loaded.kind != "network":
        raise ValueError(f"serving requires a network model, got {loaded.kind}")
    assert isinstance(loaded.model, ModelArtifact)
    return create_app(loaded.model)
