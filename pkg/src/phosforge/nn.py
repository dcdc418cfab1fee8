"""From-scratch feedforward network: sigmoid layers, MSE loss, backprop, Adam.

Everything here is plain numpy; training is single-threaded and bitwise
deterministic for a fixed seed, config, and data order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .domain import FeatureId, FEATURE_ORDER, HeatRecord, feature_vector
from .preprocess import NormParams, TARGET_KEY, denormalize, fisher_yates, normalize_record

FORMAT_VERSION = "phosforge-model/1"


@dataclass(frozen=True)
class Architecture:
    """Layer widths of a fully connected sigmoid network."""

    hidden: tuple[int, ...]
    input_dim: int = 12
    output_dim: int = 1
    activation: str = "sigmoid"

    def __post_init__(self) -> None:
        if not self.hidden:
            raise ValueError("need at least one hidden layer")
        if min((self.input_dim, self.output_dim, *self.hidden)) < 1:
            raise ValueError("every layer width must be >= 1")
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(fan_out, fan_in) per layer."""
        w = self.widths
        return [(w[i + 1], w[i]) for i in range(len(w) - 1)]


@dataclass
class Parameters:
    """Per-layer weight matrices (fan_out x fan_in) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "Parameters":
        return Parameters([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def check_shapes(self, arch: Architecture) -> None:
        shapes = arch.layer_shapes()
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise ValueError("layer count does not match architecture")
        for w, b, (fan_out, fan_in) in zip(self.weights, self.biases, shapes):
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise ValueError(f"parameter shapes {w.shape}/{b.shape} do not match {(fan_out, fan_in)}")


Gradients = Parameters  # same container shape


def init_params(arch: Architecture, seed: int) -> Parameters:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = []
    biases = []
    for fan_out, fan_in in arch.layer_shapes():
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Parameters(weights, biases)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign to stay overflow-free for large |z|.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_prime_from_activation(a: np.ndarray) -> np.ndarray:
    return a * (1.0 - a)


@dataclass
class ForwardCache:
    """Activations a_0..a_L and pre-activations z_1..z_L of one forward pass."""

    activations: list[np.ndarray]
    pre_activations: list[np.ndarray]


def forward(params: Parameters, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run the network on x (single 12-vector or batch of rows).

    Returns (y_hat, cache); y_hat has one sigmoid output per input row and
    therefore always lies in (0, 1).
    """
    a = np.atleast_2d(np.asarray(x, dtype=float))
    activations = [a]
    pre_activations = []
    for w, b in zip(params.weights, params.biases):
        z = a @ w.T + b
        a = sigmoid(z)
        pre_activations.append(z)
        activations.append(a)
    return a[:, 0], ForwardCache(activations, pre_activations)


def loss(y_hat: Sequence[float], y: Sequence[float]) -> float:
    """Mean squared error."""
    yh = np.asarray(y_hat, dtype=float)
    ya = np.asarray(y, dtype=float)
    if yh.shape != ya.shape or yh.size == 0:
        raise ValueError("loss needs two equal-length non-empty vectors")
    d = yh - ya
    return float(np.mean(d * d))


def backward(params: Parameters, cache: ForwardCache, y: np.ndarray) -> Gradients:
    """Analytic gradient of the mean squared error for the cached pass.

    sigma'(z) = sigma(z)(1 - sigma(z)) is applied at every layer including
    the output; for a single sample the output-bias gradient reduces to
    2(y_hat - y) * sigma'(z_L).
    """
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    batch = cache.activations[0].shape[0]
    if ya.shape != (batch,):
        raise ValueError("target length does not match cached batch")
    y_hat = cache.activations[-1][:, 0]
    delta = (2.0 * (y_hat - ya) / batch)[:, None] * sigmoid_prime_from_activation(
        cache.activations[-1]
    )
    g_w: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    g_b: list[np.ndarray] = [np.empty(0)] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        g_w[layer] = delta.T @ cache.activations[layer]
        g_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer]) * sigmoid_prime_from_activation(
                cache.activations[layer]
            )
    return Parameters(g_w, g_b)


def numeric_gradient(
    params: Parameters, x: np.ndarray, y: float, h: float = 1e-5
) -> Gradients:
    """Central-difference gradient of the single-sample squared error (test oracle)."""
    if h <= 0:
        raise ValueError("h must be positive")

    def loss_at(p: Parameters) -> float:
        y_hat, _ = forward(p, x)
        return float((y_hat[0] - y) ** 2)

    grads = Parameters(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )
    work = params.copy()
    for arrays, out in ((work.weights, grads.weights), (work.biases, grads.biases)):
        for arr, g in zip(arrays, out):
            flat = arr.reshape(-1)
            gflat = g.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = loss_at(work)
                flat[i] = orig - h
                down = loss_at(work)
                flat[i] = orig
                gflat[i] = (up - down) / (2.0 * h)
    return grads


@dataclass
class AdamState:
    """First/second moment estimates and step counter."""

    m: Parameters
    v: Parameters
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Parameters) -> "AdamState":
        return cls(
            m=Parameters([np.zeros_like(w) for w in params.weights],
                         [np.zeros_like(b) for b in params.biases]),
            v=Parameters([np.zeros_like(w) for w in params.weights],
                         [np.zeros_like(b) for b in params.biases]),
            t=0,
        )


@dataclass(frozen=True)
class EarlyStopping:
    patience: int = 50
    restore_best: bool = True


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    early_stopping: Optional[EarlyStopping] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


def adam_step(
    params: Parameters, grads: Gradients, state: AdamState, config: TrainConfig
) -> tuple[Parameters, AdamState]:
    """One bias-corrected Adam update; returns fresh parameters and state."""
    t = state.t + 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t

    def update(thetas, gs, ms, vs):
        new_theta, new_m, new_v = [], [], []
        for theta, g, m, v in zip(thetas, gs, ms, vs):
            m2 = b1 * m + (1.0 - b1) * g
            v2 = b2 * v + (1.0 - b2) * (g * g)
            m_hat = m2 / bc1
            v_hat = v2 / bc2
            new_theta.append(theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon))
            new_m.append(m2)
            new_v.append(v2)
        return new_theta, new_m, new_v

    w, m_w, v_w = update(params.weights, grads.weights, state.m.weights, state.v.weights)
    b, m_b, v_b = update(params.biases, grads.biases, state.m.biases, state.v.biases)
    return Parameters(w, b), AdamState(Parameters(m_w, m_b), Parameters(v_w, v_b), t)


@dataclass
class TrainReport:
    """Per-epoch learning curves plus bookkeeping of the run."""

    train_losses: list[float]
    val_losses: list[float]
    best_epoch: int
    total_iterations: int

    @property
    def epochs_run(self) -> int:
        return len(self.train_losses)


@dataclass(frozen=True)
class ModelMetadata:
    train_config: TrainConfig
    data_fingerprint: str
    format_version: str = FORMAT_VERSION
    # Wall-clock training time; informational only and deliberately not
    # persisted, so identical runs produce identical model files.
    created_at: Optional[str] = None


@dataclass
class ModelArtifact:
    """A trained network with everything needed to serve it."""

    architecture: Architecture
    parameters: Parameters
    norm_params: NormParams
    metadata: ModelMetadata

    def __post_init__(self) -> None:
        self.parameters.check_shapes(self.architecture)
        if not self.norm_params.has_target:
            raise ValueError("norm_params must cover the prediction target")
        missing = [f.value for f in FEATURE_ORDER if f not in self.norm_params.columns]
        if missing:
            raise ValueError(f"norm_params missing features: {', '.join(missing)}")


def _array_fingerprint(x: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(x, dtype=float).tobytes())
    h.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return h.hexdigest()


def train(
    x_train: np.ndarray,
    y_train: np.ndarray,
    arch: Architecture,
    config: TrainConfig,
    norm_params: NormParams,
    x_val: Optional[np.ndarray] = None,
    y_val: Optional[np.ndarray] = None,
) -> tuple[ModelArtifact, TrainReport]:
    """Mini-batch Adam training on normalized data.

    Each epoch: seeded Fisher-Yates shuffle, contiguous batches (last may be
    short), mean gradient per batch, one Adam step per batch. Training and
    validation MSE are recorded per epoch (full pass after the updates).
    """
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    n = x_train.shape[0]
    if n == 0:
        raise ValueError("training set is empty")
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds training size {n}")
    has_val = x_val is not None and y_val is not None
    if config.early_stopping is not None and not has_val:
        raise ValueError("early stopping requires a validation set")

    params = init_params(arch, config.seed)
    state = AdamState.zeros_like(params)
    shuffle_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.seed, 1])))

    train_losses: list[float] = []
    val_losses: list[float] = []
    best_epoch = 0
    best_monitor = np.inf
    best_params = params.copy()
    iterations = 0

    for epoch in range(config.epochs):
        order = fisher_yates(n, shuffle_rng)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = x_train[idx]
            yb = y_train[idx]
            _, cache = forward(params, xb)
            grads = backward(params, cache, yb)
            params, state = adam_step(params, grads, state, config)
            iterations += 1
        y_hat, _ = forward(params, x_train)
        train_losses.append(loss(y_hat, y_train))
        if has_val:
            yv_hat, _ = forward(params, x_val)
            val_losses.append(loss(yv_hat, y_val))
        monitor = val_losses[-1] if has_val else train_losses[-1]
        if monitor < best_monitor:
            best_monitor = monitor
            best_epoch = epoch
            best_params = params.copy()
        if (
            config.early_stopping is not None
            and epoch - best_epoch >= config.early_stopping.patience
        ):
            break

    if config.early_stopping is not None and config.early_stopping.restore_best:
        params = best_params

    metadata = ModelMetadata(
        train_config=config,
        data_fingerprint=_array_fingerprint(x_train, y_train),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    artifact = ModelArtifact(arch, params, norm_params, metadata)
    report = TrainReport(train_losses, val_losses, best_epoch, iterations)
    return artifact, report


@dataclass(frozen=True)
class Prediction:
    p_wtpct: float
    out_of_range: tuple[FeatureId, ...]

    @property
    def p_ppm(self) -> float:
        return self.p_wtpct * 1e4

    @property
    def warning(self) -> bool:
        return bool(self.out_of_range)


def predict(artifact: ModelArtifact, record: HeatRecord) -> Prediction:
    """Normalize, run the network, denormalize back to wt%.

    The warning lists features outside the fitted normalization range; the
    prediction is still returned (extrapolation is the operator's call).
    """
    z, out_of_range = normalize_record(feature_vector(record), artifact.norm_params)
    y_hat, _ = forward(artifact.parameters, z)
    p = denormalize(float(y_hat[0]), TARGET_KEY, artifact.norm_params)
    return Prediction(p_wtpct=p, out_of_range=tuple(out_of_range))


def predict_normalized(artifact: ModelArtifact, x: np.ndarray) -> np.ndarray:
    """Batch prediction in normalized space (evaluation plumbing)."""
    y_hat, _ = forward(artifact.parameters, x)
    return y_hat
