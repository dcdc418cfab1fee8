import pytest
from fastapi.testclient import TestClient

from phosforge import ingest, nn, preprocess, service
from phosforge.domain import FeatureId, FEATURE_ORDER, HeatRecord
from phosforge.service import create_app

from conftest import mean_features


@pytest.fixture(scope="module")
def artifact():
    """Small but sign-faithful network trained on linear synthetic data."""
    config = ingest.SynthConfig(n_records=500, noise_sd=0.0002, outlier_fraction=0.0, seed=77)
    dataset = ingest.generate_synthetic(config)
    train_set, _, _ = preprocess.split(dataset, preprocess.SplitSpec(0.9, 0.0, 0.1, seed=77))
    norm = preprocess.fit_minmax(train_set)
    x, y, _ = preprocess.normalize_dataset(train_set, norm)
    tc = nn.TrainConfig(epochs=150, batch_size=25, learning_rate=0.005, seed=77)
    art, _ = nn.train(x, y, nn.Architecture(hidden=(16, 8)), tc, norm)
    return art


@pytest.fixture(scope="module")
def client(artifact):
    return TestClient(create_app(artifact))


def base_features() -> dict[str, float]:
    return {fid.value: float(v) for fid, v in mean_features().items()}


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_model_info(client):
    response = client.get("/v1/model")
    assert response.status_code == 200
    doc = response.json()
    assert doc["architecture"]["hidden"] == [16, 8]
    assert doc["architecture"]["activation"] == "sigmoid"
    assert set(doc["norm_ranges"]) == {f.value for f in FEATURE_ORDER} | {"endpoint_p"}
    assert len(doc["features"]) == 12
    assert doc["format"] == "phosforge-model/1"


def test_predict_matches_library_bitwise(client, artifact):
    features = base_features()
    response = client.post("/v1/predict", json={"features": features})
    assert response.status_code == 200
    doc = response.json()
    record = HeatRecord("request", {FeatureId(k): v for k, v in features.items()}, None)
    expected = nn.predict(artifact, record)
    assert doc["p_wtpct"] == expected.p_wtpct
    assert doc["p_ppm"] == expected.p_wtpct * 1e4
    assert doc["out_of_range"] == []


def test_predict_flags_out_of_range_inputs(client):
    features = base_features()
    features["scrap_weight"] = 49000.0  # far above anything in training
    response = client.post("/v1/predict", json={"features": features})
    assert response.status_code == 200
    assert "scrap_weight" in response.json()["out_of_range"]


def test_predict_schema_violations_are_400(client):
    features = base_features()
    del features["mn_scrap"]
    response = client.post("/v1/predict", json={"features": features})
    assert response.status_code == 400
    assert any("mn_scrap" in err["message"] for err in response.json()["errors"])

    features = base_features()
    features["mystery"] = 1.0
    assert client.post("/v1/predict", json={"features": features}).status_code == 400

    features = base_features()
    features["energy"] = "not-a-number"
    response = client.post("/v1/predict", json={"features": features})
    assert response.status_code == 400
    assert any("energy" in err["field"] for err in response.json()["errors"])

    assert client.post("/v1/predict", content=b"plain text").status_code == 400


def test_predict_domain_violations_are_422(client):
    features = base_features()
    features["tap_temp"] = 25.0
    response = client.post("/v1/predict", json={"features": features})
    assert response.status_code == 422
    errors = response.json()["errors"]
    assert errors[0]["field"] == "tap_temp"


def test_whatif_empty_overrides_gives_single_zero_delta(client):
    response = client.post("/v1/whatif", json={"base": {"features": base_features()}, "overrides": []})
    assert response.status_code == 200
    entries = response.json()
    assert len(entries) == 1
    assert entries[0]["applied_override"] is None
    assert entries[0]["delta_wtpct"] == 0.0


def test_whatif_returns_one_entry_per_override_in_order(client):
    features = base_features()
    overrides = [
        {"feature": "injected_lime", "value": features["injected_lime"] * 1.1},
        {"feature": "duration", "value": features["duration"] + 30.0},
        {"feature": "energy", "value": features["energy"] - 500.0},
    ]
    response = client.post("/v1/whatif", json={"base": {"features": features}, "overrides": overrides})
    assert response.status_code == 200
    entries = response.json()
    assert [e["applied_override"]["feature"] for e in entries] == [
        "injected_lime", "duration", "energy",
    ]


def test_whatif_sign_anchors(client):
    features = base_features()
    response = client.post(
        "/v1/whatif",
        json={
            "base": {"features": features},
            "overrides": [
                {"feature": "injected_oxygen", "value": features["injected_oxygen"] + 40.0},
                {"feature": "duration", "value": features["duration"] + 60.0},
            ],
        },
    )
    entries = response.json()
    assert entries[0]["delta_wtpct"] < 0.0  # more oxygen -> less phosphorus
    assert entries[1]["delta_wtpct"] > 0.0  # longer heat -> reversion raises P


def test_whatif_rejects_invalid_override(client):
    features = base_features()
    response = client.post(
        "/v1/whatif",
        json={"base": {"features": features},
              "overrides": [{"feature": "deslag_temp", "value": 10.0}]},
    )
    assert response.status_code == 422
    response = client.post(
        "/v1/whatif",
        json={"base": {"features": features},
              "overrides": [{"feature": "nope", "value": 1.0}]},
    )
    assert response.status_code == 400


def test_responses_are_replayable(client):
    body = {"features": base_features()}
    first = client.post("/v1/predict", json=body)
    second = client.post("/v1/predict", json=body)
    assert first.content == second.content


def test_internal_errors_never_leak(artifact, monkeypatch):
    app = create_app(artifact)
    broken_client = TestClient(app, raise_server_exceptions=False)

    def boom(*args, **kwargs):
        raise RuntimeError("secret internals")

    monkeypatch.setattr(service, "predict", boom)
    response = broken_client.post("/v1/predict", json={"features": base_features()})
    assert response.status_code == 500
    assert response.json() == {"detail": "internal error"}
    assert "secret" not in response.text


def test_load_app_rejects_non_network_models(tmp_path):
    import numpy as np

    from phosforge.baselines import ForestConfig, rf_train
    from phosforge.persist import save_model
    from phosforge.preprocess import NormParams, TARGET_KEY

    columns = {fid: (0.0, 1.0) for fid in FeatureId}
    columns[TARGET_KEY] = (0.0, 1.0)
    norm = NormParams(columns=columns, fitted_on="x")
    rng = np.random.default_rng(0)
    forest = rf_train(rng.uniform(0, 1, (20, 12)), rng.uniform(0, 1, 20), ForestConfig(n_trees=2))
    path = tmp_path / "forest.json"
    save_model(forest, path, norm_params=norm)
    with pytest.raises(ValueError, match="network"):
        service.load_app(path)
