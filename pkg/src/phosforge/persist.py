"""Versioned on-disk model documents for the network, forest, and SVR families.

Files are canonical JSON (sorted keys, stable float repr), so retraining
with identical inputs reproduces byte-identical documents. Numbers are
written in shortest exact decimal form and round-trip bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .baselines import Forest, ForestConfig, SvrConfig, SvrModel, TreeNode
from .domain import FeatureId, FEATURE_ORDER
from .nn import (
    Architecture,
    EarlyStopping,
    ModelArtifact,
    ModelMetadata,
    Parameters,
    TrainConfig,
)
from .preprocess import NormParams, TARGET_KEY

NETWORK_FORMAT = "phosforge-model/1"
FOREST_FORMAT = "phosforge-forest/1"
SVR_FORMAT = "phosforge-svr/1"


class ModelFormatError(ValueError):
    """Raised when a model document is structurally invalid."""


def _norm_to_doc(params: NormParams) -> dict:
    columns = {}
    for key, (lo, hi) in params.columns.items():
        name = key.value if isinstance(key, FeatureId) else str(key)
        columns[name] = [lo, hi]
    return {"columns": columns, "fitted_on": params.fitted_on}


def _norm_from_doc(doc: dict) -> NormParams:
    columns: dict = {}
    for name, pair in doc["columns"].items():
        key = FeatureId(name) if name != TARGET_KEY else TARGET_KEY
        columns[key] = (float(pair[0]), float(pair[1]))
    return NormParams(columns=columns, fitted_on=str(doc.get("fitted_on", "")))


def _train_config_to_doc(config: TrainConfig) -> dict:
    doc = {
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "beta1": config.beta1,
        "beta2": config.beta2,
        "epsilon": config.epsilon,
        "seed": config.seed,
        "early_stopping": None,
    }
    if config.early_stopping is not None:
        doc["early_stopping"] = {
            "patience": config.early_stopping.patience,
            "restore_best": config.early_stopping.restore_best,
        }
    return doc


def _train_config_from_doc(doc: dict) -> TrainConfig:
    es = doc.get("early_stopping")
    return TrainConfig(
        epochs=int(doc["epochs"]),
        batch_size=int(doc["batch_size"]),
        learning_rate=float(doc["learning_rate"]),
        beta1=float(doc["beta1"]),
        beta2=float(doc["beta2"]),
        epsilon=float(doc["epsilon"]),
        seed=int(doc["seed"]),
        early_stopping=None
        if es is None
        else EarlyStopping(patience=int(es["patience"]), restore_best=bool(es["restore_best"])),
    )


def _network_to_doc(artifact: ModelArtifact) -> dict:
    layers = []
    for w, b in zip(artifact.parameters.weights, artifact.parameters.biases):
        layers.append({"weights": w.reshape(-1).tolist(), "bias": b.tolist()})
    return {
        "format": NETWORK_FORMAT,
        "architecture": {
            "input_dim": artifact.architecture.input_dim,
            "hidden": list(artifact.architecture.hidden),
            "output_dim": artifact.architecture.output_dim,
            "activation": artifact.architecture.activation,
        },
        "layers": layers,
        "norm_params": _norm_to_doc(artifact.norm_params),
        "metadata": {
            "train_config": _train_config_to_doc(artifact.metadata.train_config),
            "data_fingerprint": artifact.metadata.data_fingerprint,
            "format_version": artifact.metadata.format_version,
        },
    }


def _network_from_doc(doc: dict) -> ModelArtifact:
    arch_doc = doc["architecture"]
    arch = Architecture(
        hidden=tuple(int(h) for h in arch_doc["hidden"]),
        input_dim=int(arch_doc["input_dim"]),
        output_dim=int(arch_doc["output_dim"]),
        activation=str(arch_doc["activation"]),
    )
    shapes = arch.layer_shapes()
    layers = doc["layers"]
    if len(layers) != len(shapes):
        raise ModelFormatError(
            f"expected {len(shapes)} layers for architecture, found {len(layers)}"
        )
    weights, biases = [], []
    for layer, (fan_out, fan_in) in zip(layers, shapes):
        flat = np.asarray(layer["weights"], dtype=float)
        if flat.size != fan_out * fan_in:
            raise ModelFormatError(
                f"layer weight count {flat.size} does not match {fan_out}x{fan_in}"
            )
        bias = np.asarray(layer["bias"], dtype=float)
        if bias.size != fan_out:
            raise ModelFormatError(f"layer bias count {bias.size} does not match {fan_out}")
        weights.append(flat.reshape(fan_out, fan_in))
        biases.append(bias)
    meta_doc = doc.get("metadata", {})
    metadata = ModelMetadata(
        train_config=_train_config_from_doc(meta_doc["train_config"]),
        data_fingerprint=str(meta_doc.get("data_fingerprint", "")),
        format_version=str(meta_doc.get("format_version", NETWORK_FORMAT)),
    )
    return ModelArtifact(arch, Parameters(weights, biases), _norm_from_doc(doc["norm_params"]), metadata)


def _tree_to_doc(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_doc(node.left),
        "right": _tree_to_doc(node.right),
    }


def _tree_from_doc(doc: dict) -> TreeNode:
    if "value" in doc:
        return TreeNode(value=float(doc["value"]))
    feature = int(doc["feature"])
    if not (0 <= feature < len(FEATURE_ORDER)):
        raise ModelFormatError(f"tree feature index {feature} out of range")
    return TreeNode(
        feature=feature,
        threshold=float(doc["threshold"]),
        left=_tree_from_doc(doc["left"]),
        right=_tree_from_doc(doc["right"]),
    )


def _forest_to_doc(forest: Forest, norm_params: NormParams) -> dict:
    cfg = forest.config
    return {
        "format": FOREST_FORMAT,
        "config": {
            "n_trees": cfg.n_trees,
            "max_depth": cfg.max_depth,
            "min_samples_leaf": cfg.min_samples_leaf,
            "min_samples_split": cfg.min_samples_split,
            "feature_fraction": cfg.feature_fraction,
            "bootstrap": cfg.bootstrap,
            "seed": cfg.seed,
        },
        "trees": [_tree_to_doc(t) for t in forest.trees],
        "norm_params": _norm_to_doc(norm_params),
    }


def _forest_from_doc(doc: dict) -> tuple[Forest, NormParams]:
    c = doc["config"]
    config = ForestConfig(
        n_trees=int(c["n_trees"]),
        max_depth=None if c["max_depth"] is None else int(c["max_depth"]),
        min_samples_leaf=int(c["min_samples_leaf"]),
        min_samples_split=int(c["min_samples_split"]),
        feature_fraction=float(c["feature_fraction"]),
        bootstrap=bool(c["bootstrap"]),
        seed=int(c["seed"]),
    )
    trees = [_tree_from_doc(t) for t in doc["trees"]]
    if len(trees) != config.n_trees:
        raise ModelFormatError("tree count does not match config")
    return Forest(trees=trees, config=config), _norm_from_doc(doc["norm_params"])


def _svr_to_doc(model: SvrModel, norm_params: NormParams) -> dict:
    return {
        "format": SVR_FORMAT,
        "gamma": model.gamma,
        "bias": model.bias,
        "support_vectors": [row.tolist() for row in model.support_vectors],
        "dual_coef": model.dual_coef.tolist(),
        "converged": model.converged,
        "kkt_gap": model.kkt_gap,
        "norm_params": _norm_to_doc(norm_params),
    }


def _svr_from_doc(doc: dict) -> tuple[SvrModel, NormParams]:
    sv = np.asarray(doc["support_vectors"], dtype=float)
    coef = np.asarray(doc["dual_coef"], dtype=float)
    if sv.size and sv.shape[0] != coef.size:
        raise ModelFormatError("support vector and dual coefficient counts differ")
    model = SvrModel(
        support_vectors=sv.reshape(coef.size, -1) if coef.size else np.empty((0, len(FEATURE_ORDER))),
        dual_coef=coef,
        bias=float(doc["bias"]),
        gamma=float(doc["gamma"]),
        converged=bool(doc.get("converged", True)),
        kkt_gap=float(doc.get("kkt_gap", 0.0)),
    )
    return model, _norm_from_doc(doc["norm_params"])


@dataclass
class LoadedModel:
    kind: str  # "network" | "forest" | "svr"
    model: Union[ModelArtifact, Forest, SvrModel]
    norm_params: NormParams


def save_model(
    model: Union[ModelArtifact, Forest, SvrModel],
    path: Union[str, Path],
    norm_params: Optional[NormParams] = None,
) -> None:
    """Write a model document; forest and SVR models need norm_params supplied."""
    if isinstance(model, ModelArtifact):
        doc = _network_to_doc(model)
    elif isinstance(model, Forest):
        if norm_params is None:
            raise ValueError("forest models need norm_params to be persisted")
        doc = _forest_to_doc(model, norm_params)
    elif isinstance(model, SvrModel):
        if norm_params is None:
            raise ValueError("svr models need norm_params to be persisted")
        doc = _svr_to_doc(model, norm_params)
    else:
        raise TypeError(f"cannot persist model of type {type(model).__name__}")
    text = json.dumps(doc, sort_keys=True, indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> LoadedModel:
    """Read any of the three model document formats, validating shapes and version."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a model document: {exc}") from exc
    fmt = doc.get("format")
    try:
        if fmt == NETWORK_FORMAT:
            artifact = _network_from_doc(doc)
            return LoadedModel("network", artifact, artifact.norm_params)
        if fmt == FOREST_FORMAT:
            forest, norm = _forest_from_doc(doc)
            return LoadedModel("forest", forest, norm)
        if fmt == SVR_FORMAT:
            svr, norm = _svr_from_doc(doc)
            return LoadedModel("svr", svr, norm)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    raise ModelFormatError(f"unsupported model format tag: {fmt!r}")
