import math

import numpy as np
import pytest

from phosforge.nn import (
    AdamState,
    Architecture,
    EarlyStopping,
    ModelArtifact,
    ModelMetadata,
    Parameters,
    TrainConfig,
    adam_step,
    backward,
    forward,
    init_params,
    loss,
    numeric_gradient,
    predict,
    train,
)
from phosforge.preprocess import NormParams, TARGET_KEY

from conftest import make_record


def _norm_params(target=(0.003, 0.018)) -> NormParams:
    from phosforge.domain import FeatureId

    columns = {fid: (0.0, 1.0) for fid in FeatureId}
    columns[TARGET_KEY] = target
    return NormParams(columns=columns, fitted_on="test")


def _zero_params(widths):
    weights = [np.zeros((b, a)) for a, b in zip(widths, widths[1:])]
    biases = [np.zeros(b) for b in widths[1:]]
    return Parameters(weights, biases)


def test_architecture_validation():
    with pytest.raises(ValueError):
        Architecture(hidden=())
    with pytest.raises(ValueError):
        Architecture(hidden=(4, 0))
    with pytest.raises(ValueError):
        Architecture(hidden=(4,), activation="relu")
    assert Architecture(hidden=(16, 8)).widths == (12, 16, 8, 1)


def test_init_params_deterministic_and_bounded():
    arch = Architecture(hidden=(128,))
    a = init_params(arch, seed=7)
    b = init_params(arch, seed=7)
    c = init_params(arch, seed=8)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    assert not np.array_equal(a.weights[0], c.weights[0])
    limit = math.sqrt(6.0 / (12 + 128))
    assert np.abs(a.weights[0]).max() <= limit
    assert limit == pytest.approx(0.2070, abs=5e-5)
    for bias in a.biases:
        assert np.all(bias == 0.0)


def test_forward_all_zero_parameters_gives_half_everywhere():
    params = _zero_params([12, 5, 3, 1])
    x = np.linspace(0.0, 1.0, 12)
    y_hat, cache = forward(params, x)
    assert y_hat[0] == 0.5
    for a in cache.activations[1:]:
        assert np.all(a == 0.5)


def test_forward_single_unit_at_zero():
    params = Parameters([np.zeros((1, 1))], [np.zeros(1)])
    y_hat, _ = forward(params, np.array([0.0]))
    assert y_hat[0] == 0.5


def test_forward_sigmoid_closed_form():
    params = Parameters([np.array([[1.0, 1.0]])], [np.zeros(1)])
    x = np.array([math.log(3.0) / 2.0, math.log(3.0) / 2.0])
    y_hat, _ = forward(params, x)
    assert y_hat[0] == pytest.approx(0.75, rel=1e-12)


def test_forward_output_strictly_inside_unit_interval():
    rng = np.random.default_rng(0)
    arch = Architecture(hidden=(6, 4))
    params = init_params(arch, 1)
    for _ in range(20):
        y_hat, _ = forward(params, rng.uniform(-5, 5, 12))
        assert 0.0 < y_hat[0] < 1.0


def test_loss_examples():
    assert loss([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert loss([1.0, 1.0], [0.0, 0.0]) == 1.0
    assert loss([0.5], [0.2]) == pytest.approx(0.09, rel=1e-12)
    with pytest.raises(ValueError):
        loss([1.0], [1.0, 2.0])


def test_backward_zero_residual_gives_zero_gradients():
    arch = Architecture(hidden=(5, 3), input_dim=4)
    params = init_params(arch, 3)
    x = np.array([0.1, 0.5, 0.9, 0.3])
    y_hat, cache = forward(params, x)
    grads = backward(params, cache, y_hat)
    for g in grads.weights + grads.biases:
        assert np.all(g == 0.0)


def test_backward_output_bias_chain_rule():
    arch = Architecture(hidden=(4,), input_dim=3)
    params = init_params(arch, 11)
    x = np.array([0.2, 0.8, 0.5])
    y = 0.3
    y_hat, cache = forward(params, x)
    grads = backward(params, cache, np.array([y]))
    z_out = cache.pre_activations[-1][0, 0]
    sig = 1.0 / (1.0 + math.exp(-z_out))
    expected = 2.0 * (y_hat[0] - y) * sig * (1.0 - sig)
    assert grads.biases[-1][0] == pytest.approx(expected, rel=1e-12)


def test_backward_matches_numeric_gradient():
    rng = np.random.default_rng(42)
    for _ in range(10):
        widths = tuple(int(w) for w in rng.integers(2, 9, size=rng.integers(1, 5)))
        arch = Architecture(hidden=widths, input_dim=int(rng.integers(2, 13)))
        params = init_params(arch, int(rng.integers(0, 10_000)))
        for b in params.biases:
            b += rng.normal(0.0, 0.3, b.shape)
        x = rng.uniform(0.0, 1.0, arch.input_dim)
        y = float(rng.uniform(0.0, 1.0))
        _, cache = forward(params, x)
        analytic = backward(params, cache, np.array([y]))
        numeric = numeric_gradient(params, x, y, h=1e-5)
        for kind in ("weights", "biases"):
            for a, n in zip(getattr(analytic, kind), getattr(numeric, kind)):
                assert np.allclose(a, n, rtol=1e-5, atol=1e-8)


def test_numeric_gradient_halving_h_quarters_error():
    arch = Architecture(hidden=(4,), input_dim=3)
    params = init_params(arch, 5)
    for b in params.biases:
        b += 0.2
    x = np.array([0.3, 0.6, 0.9])
    y = 0.2
    _, cache = forward(params, x)
    exact = backward(params, cache, np.array([y]))
    errs = []
    for h in (2e-3, 1e-3):
        num = numeric_gradient(params, x, y, h=h)
        err = max(
            float(np.abs(a - n).max())
            for a, n in zip(exact.weights + exact.biases, num.weights + num.biases)
        )
        errs.append(err)
    ratio = errs[0] / errs[1]
    assert 2.5 < ratio < 6.0


def test_numeric_gradient_rejects_nonpositive_h():
    params = _zero_params([2, 2, 1])
    with pytest.raises(ValueError):
        numeric_gradient(params, np.array([0.1, 0.2]), 0.5, h=0.0)


def test_adam_zero_gradient_keeps_parameters():
    params = _zero_params([3, 2, 1])
    params.weights[0] += 0.5
    grads = _zero_params([3, 2, 1])
    state = AdamState.zeros_like(params)
    config = TrainConfig(epochs=1, batch_size=1, learning_rate=0.1)
    new_params, new_state = adam_step(params, grads, state, config)
    assert np.array_equal(new_params.weights[0], params.weights[0])
    assert new_state.t == 1


def test_adam_matches_hand_computed_table():
    # With g = 1 at every step, m_hat = v_hat = 1 exactly, so each update
    # subtracts lr / (1 + eps); three steps follow in closed form.
    config = TrainConfig(epochs=1, batch_size=1, learning_rate=0.1)
    params = Parameters([np.array([[0.0]])], [np.zeros(1)])
    grads = Parameters([np.array([[1.0]])], [np.zeros(1)])
    state = AdamState.zeros_like(params)
    per_step = 0.1 / (1.0 + 1e-8)
    for t in (1, 2, 3):
        params, state = adam_step(params, grads, state, config)
        assert state.t == t
        assert params.weights[0][0, 0] == pytest.approx(-t * per_step, abs=1e-12)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0, batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(epochs=1, batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=1, batch_size=1, beta1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=1, batch_size=1, epsilon=0.0)


def _linear_problem(n, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, (n, 12))
    w = np.linspace(-0.3, 0.3, 12)
    y = 0.5 + x @ w
    if noise:
        y = y + rng.normal(0.0, noise, n)
    return x, np.clip(y, 0.0, 1.0)


def test_train_is_bitwise_deterministic():
    x, y = _linear_problem(80, seed=1)
    arch = Architecture(hidden=(8, 4))
    config = TrainConfig(epochs=20, batch_size=16, seed=9)
    a1, r1 = train(x, y, arch, config, _norm_params())
    a2, r2 = train(x, y, arch, config, _norm_params())
    assert r1.train_losses == r2.train_losses
    for w1, w2 in zip(a1.parameters.weights, a2.parameters.weights):
        assert np.array_equal(w1, w2)


def test_train_learns_constant_target():
    rng = np.random.default_rng(2)
    x = rng.uniform(0.0, 1.0, (60, 12))
    y = np.full(60, 0.5)
    config = TrainConfig(epochs=200, batch_size=10, learning_rate=0.01, seed=0)
    _, report = train(x, y, Architecture(hidden=(4,)), config, _norm_params())
    assert report.train_losses[-1] < 1e-6
    assert report.epochs_run == 200


def test_train_iteration_count_603_by_50():
    x, y = _linear_problem(603, seed=3)
    config = TrainConfig(epochs=2, batch_size=50, seed=0)
    _, report = train(x, y, Architecture(hidden=(4,)), config, _norm_params())
    assert report.total_iterations == 26  # 13 batches per epoch, last of size 3


def test_train_loss_nearly_monotone_on_noise_free_linear_target():
    x, y = _linear_problem(200, seed=4)
    config = TrainConfig(epochs=100, batch_size=32, learning_rate=0.003, seed=1)
    _, report = train(x, y, Architecture(hidden=(8,)), config, _norm_params())
    tail = report.train_losses[10:]
    upticks = sum(1 for a, b in zip(tail, tail[1:]) if b > a)
    assert upticks <= 0.05 * len(tail)


def test_train_input_validation():
    x, y = _linear_problem(20, seed=5)
    with pytest.raises(ValueError):
        train(x[:0], y[:0], Architecture(hidden=(4,)), TrainConfig(epochs=1, batch_size=1), _norm_params())
    with pytest.raises(ValueError):
        train(x, y, Architecture(hidden=(4,)), TrainConfig(epochs=1, batch_size=21), _norm_params())
    config = TrainConfig(epochs=1, batch_size=4, early_stopping=EarlyStopping())
    with pytest.raises(ValueError):
        train(x, y, Architecture(hidden=(4,)), config, _norm_params())


def test_early_stopping_bounds_epochs_and_restores_best():
    x, y = _linear_problem(120, seed=6, noise=0.05)
    x_val, y_val = _linear_problem(40, seed=7, noise=0.05)
    patience = 8
    config = TrainConfig(
        epochs=400, batch_size=20, learning_rate=0.02, seed=2,
        early_stopping=EarlyStopping(patience=patience, restore_best=True),
    )
    artifact, report = train(x, y, Architecture(hidden=(6,)), config, _norm_params(), x_val, y_val)
    assert report.epochs_run < 400
    assert report.epochs_run <= report.best_epoch + 1 + patience
    y_hat, _ = forward(artifact.parameters, x_val)
    assert loss(y_hat, y_val) == pytest.approx(min(report.val_losses), rel=1e-12)


def test_predict_denormalizes_and_warns():
    params = _zero_params([12, 1, 1])
    arch = Architecture(hidden=(1,))
    metadata = ModelMetadata(
        train_config=TrainConfig(epochs=1, batch_size=1), data_fingerprint="test"
    )
    norm = NormParams(
        columns={**{fid: (0.0, 50000.0) for fid in _norm_params().columns if fid != TARGET_KEY},
                 TARGET_KEY: (0.003, 0.018)},
        fitted_on="test",
    )
    artifact = ModelArtifact(arch, params, norm, metadata)
    record = make_record()
    result = predict(artifact, record)
    # all-zero network emits sigmoid(0) = 0.5 -> midpoint of the target range
    assert result.p_wtpct == pytest.approx(0.0105, rel=1e-12)
    assert result.p_ppm == pytest.approx(105.0, rel=1e-12)
    assert result.out_of_range == ()
    high = make_record(scrap_weight=60000.0)
    flagged = predict(artifact, high)
    assert any(f.value == "scrap_weight" for f in flagged.out_of_range)
    assert flagged.warning


def test_artifact_validates_shapes_and_norm_coverage():
    arch = Architecture(hidden=(2,))
    metadata = ModelMetadata(train_config=TrainConfig(epochs=1, batch_size=1), data_fingerprint="x")
    with pytest.raises(ValueError):
        ModelArtifact(arch, _zero_params([12, 3, 1]), _norm_params(), metadata)
    incomplete = NormParams(columns={TARGET_KEY: (0.0, 1.0)}, fitted_on="x")
    with pytest.raises(ValueError):
        ModelArtifact(arch, _zero_params([12, 2, 1]), incomplete, metadata)
