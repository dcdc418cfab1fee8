"""Regenerate the console's golden request/response fixtures.

Trains the same small deterministic model the service tests use, runs the
real HTTP app in-process, and captures request/response pairs. Run from the
repository root with the package installed:

    python frontend/tools/generate_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from phosforge import ingest, nn, preprocess
from phosforge.ingest import CALIBRATION_STATS
from phosforge.domain import FeatureId, FEATURE_ORDER
from phosforge.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def train_model() -> nn.ModelArtifact:
    config = ingest.SynthConfig(n_records=500, noise_sd=0.0002, outlier_fraction=0.0, seed=77)
    dataset = ingest.generate_synthetic(config)
    train_set, _, _ = preprocess.split(dataset, preprocess.SplitSpec(0.9, 0.0, 0.1, seed=77))
    norm = preprocess.fit_minmax(train_set)
    x, y, _ = preprocess.normalize_dataset(train_set, norm)
    tc = nn.TrainConfig(epochs=150, batch_size=25, learning_rate=0.005, seed=77)
    artifact, _ = nn.train(x, y, nn.Architecture(hidden=(16, 8)), tc, norm)
    return artifact


def base_features() -> dict[str, float]:
    return {fid.value: CALIBRATION_STATS[fid].mean for fid in FEATURE_ORDER}


def main() -> None:
    client = TestClient(create_app(train_model()))
    FIXTURES.mkdir(parents=True, exist_ok=True)
    features = base_features()

    def capture(name: str, path: str, body: dict) -> None:
        response = client.post(path, json=body)
        response.raise_for_status()
        doc = {"path": path, "request": body, "response": response.json()}
        (FIXTURES / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {name}.json")

    capture("predict", "/v1/predict", {"features": features})

    oxygen = features[FeatureId.INJECTED_OXYGEN.value]
    capture("whatif_oxygen", "/v1/whatif", {
        "base": {"features": features},
        "overrides": [
            {"feature": "injected_oxygen", "value": oxygen + 20.0},
            {"feature": "injected_oxygen", "value": oxygen + 40.0},
        ],
    })

    duration = features[FeatureId.DURATION.value]
    capture("whatif_duration", "/v1/whatif", {
        "base": {"features": features},
        "overrides": [
            {"feature": "duration", "value": duration + 30.0},
            {"feature": "duration", "value": duration + 60.0},
        ],
    })

    overrides = []
    for fid in FEATURE_ORDER:
        stats = CALIBRATION_STATS[fid]
        overrides.append({"feature": fid.value, "value": features[fid.value] - stats.std})
        overrides.append({"feature": fid.value, "value": features[fid.value] + stats.std})
    capture("sensitivity", "/v1/whatif", {"base": {"features": features}, "overrides": overrides})


if __name__ == "__main__":
    main()
