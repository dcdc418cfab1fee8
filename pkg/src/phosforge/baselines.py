"""Comparison models: random-forest regression and epsilon-SVR with RBF kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import FeatureId, FEATURE_ORDER

# Split qualities closer than this are treated as ties and broken by
# (lowest feature index, lowest threshold); integer-grid oracles rely on it.
SPLIT_TIE_TOL = 1e-9


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    feature_fraction: float = 1.0
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not (0.0 < self.feature_fraction <= 1.0):
            raise ValueError("feature_fraction must lie in (0, 1]")
        if self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise ValueError("min_samples_leaf >= 1 and min_samples_split >= 2 required")


@dataclass
class TreeNode:
    """Internal node (feature index + threshold) or leaf (mean target value)."""

    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def feature_id(self) -> Optional[FeatureId]:
        return None if self.feature is None else FEATURE_ORDER[self.feature]


def best_split(
    X: np.ndarray, y: np.ndarray, features: list[int], min_samples_leaf: int
) -> Optional[tuple[int, float]]:
    """Exact greedy CART split minimizing summed child squared error.

    Thresholds are midpoints of consecutive sorted unique feature values;
    x <= threshold routes left. Returns None when no split satisfies the
    leaf-size constraint or none improves on a single leaf.
    """
    n = y.size
    best: Optional[tuple[float, int, float]] = None  # (sse, feature, threshold)
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum = csum[-1]
        total_sq = csq[-1]
        for i in range(n - 1):
            if xs[i] == xs[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            sl, sql = csum[i], csq[i]
            sr, sqr = total_sum - sl, total_sq - sql
            sse = (sql - sl * sl / nl) + (sqr - sr * sr / nr)
            threshold = 0.5 * (xs[i] + xs[i + 1])
            if best is None or sse < best[0] - SPLIT_TIE_TOL:
                best = (sse, f, threshold)
            elif abs(sse - best[0]) <= SPLIT_TIE_TOL and (f, threshold) < (best[1], best[2]):
                best = (best[0], f, threshold)
    if best is None:
        return None
    return best[1], best[2]


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    depth: int,
    config: ForestConfig,
    rng: np.random.Generator,
) -> TreeNode:
    n = y.size
    if (
        n < config.min_samples_split
        or (config.max_depth is not None and depth >= config.max_depth)
        or float(y.max() - y.min()) == 0.0
    ):
        return TreeNode(value=float(y.mean()))
    n_features = X.shape[1]
    k = math.ceil(config.feature_fraction * n_features)
    if k < n_features:
        features = sorted(int(i) for i in rng.choice(n_features, size=k, replace=False))
    else:
        features = list(range(n_features))
    found = best_split(X, y, features, config.min_samples_leaf)
    if found is None:
        return TreeNode(value=float(y.mean()))
    f, threshold = found
    mask = X[:, f] <= threshold
    return TreeNode(
        feature=f,
        threshold=threshold,
        left=_grow(X[mask], y[mask], depth + 1, config, rng),
        right=_grow(X[~mask], y[~mask], depth + 1, config, rng),
    )


@dataclass
class Forest:
    trees: list[TreeNode]
    config: ForestConfig


def rf_train(X: np.ndarray, y: np.ndarray, config: ForestConfig) -> Forest:
    """Grow the forest; tree t uses an independent stream seeded config.seed + t."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("training set is empty")
    trees = []
    for t in range(config.n_trees):
        rng = np.random.Generator(np.random.PCG64(config.seed + t))
        if config.bootstrap:
            idx = rng.integers(0, y.size, size=y.size)
            xb, yb = X[idx], y[idx]
        else:
            xb, yb = X, y
        trees.append(_grow(xb, yb, 0, config, rng))
    return Forest(trees=trees, config=config)


def tree_predict(node: TreeNode, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if node.is_leaf:
        return np.full(X.shape[0], node.value)
    out = np.empty(X.shape[0])
    mask = X[:, node.feature] <= node.threshold
    if mask.any():
        out[mask] = tree_predict(node.left, X[mask])
    if (~mask).any():
        out[~mask] = tree_predict(node.right, X[~mask])
    return out


def rf_predict(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Arithmetic mean of the trees' predictions."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    acc = np.zeros(X.shape[0])
    for tree in forest.trees:
        acc += tree_predict(tree, X)
    return acc / len(forest.trees)


@dataclass(frozen=True)
class SvrConfig:
    C: float = 1.0
    gamma: float = 1.0 / 12.0
    epsilon_tube: float = 0.01
    tol: float = 1e-3
    max_passes: int = 100_000
    record_objective: bool = False

    def __post_init__(self) -> None:
        if self.C <= 0 or self.gamma <= 0:
            raise ValueError("C and gamma must be positive")
        if self.epsilon_tube < 0:
            raise ValueError("epsilon_tube must be >= 0")
        if self.tol <= 0 or self.max_passes < 1:
            raise ValueError("tol must be > 0 and max_passes >= 1")


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # (n_sv, d)
    dual_coef: np.ndarray  # alpha - alpha*, one per support vector
    bias: float
    gamma: float
    converged: bool = True
    kkt_gap: float = 0.0
    iterations: int = 0
    objective_curve: list[float] = field(default_factory=list)


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """k(x, x') = exp(-gamma * ||x - x'||^2) for all row pairs."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def svr_train(X: np.ndarray, y: np.ndarray, config: SvrConfig) -> SvrModel:
    """Solve the epsilon-SVR dual by pairwise coordinate optimization.

    The 2n box-constrained dual (alpha stacked over alpha*) is optimized by
    exact two-variable steps. Pair selection is the deterministic first-order
    heuristic: the worst KKT violator on the up side against the candidate
    maximizing the violation gap. Stops when the KKT gap <= tol or after
    max_passes pair updates; non-convergence is reported, not fatal.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = y.size
    if n == 0:
        raise ValueError("training set is empty")
    C, eps = config.C, config.epsilon_tube
    K = rbf_kernel(X, X, config.gamma)

    # Stacked variables: a[:n] = alpha, a[n:] = alpha*; sign z = +1 / -1.
    a = np.zeros(2 * n)
    z = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([eps - y, eps + y])
    g = p.copy()  # gradient of 1/2 a'Qa + p'a at a = 0
    obj_min = 0.0
    curve: list[float] = []

    def q_column(s: int) -> np.ndarray:
        i = s % n
        col = K[:, i] * z[s]
        return np.concatenate([col, -col])

    gap = np.inf
    it = 0
    while it < config.max_passes:
        zg = -z * g
        up_mask = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
        low_mask = ((z < 0) & (a < C)) | ((z > 0) & (a > 0))
        if not up_mask.any() or not low_mask.any():
            gap = 0.0
            break
        up_vals = np.where(up_mask, zg, -np.inf)
        low_vals = np.where(low_mask, zg, np.inf)
        s_i = int(np.argmax(up_vals))
        s_j = int(np.argmin(low_vals))
        gap = float(up_vals[s_i] - low_vals[s_j])
        if gap <= config.tol:
            break
        eta = K[s_i % n, s_i % n] + K[s_j % n, s_j % n] - 2.0 * z[s_i] * z[s_j] * K[s_i % n, s_j % n]
        room_i = (C - a[s_i]) if z[s_i] > 0 else a[s_i]
        room_j = a[s_j] if z[s_j] > 0 else (C - a[s_j])
        delta_max = min(room_i, room_j)
        if eta > 1e-12:
            delta = min(gap / eta, delta_max)
        else:
            delta = delta_max
        if delta <= 0.0:
            break
        da_i = z[s_i] * delta
        da_j = -z[s_j] * delta
        obj_min += g[s_i] * da_i + g[s_j] * da_j + 0.5 * eta * delta * delta
        a[s_i] += da_i
        a[s_j] += da_j
        g += q_column(s_i) * da_i + q_column(s_j) * da_j
        it += 1
        if config.record_objective:
            curve.append(-obj_min)

    beta = a[:n] - a[n:]
    free = (a > 1e-12) & (a < C - 1e-12)
    if free.any():
        b = float(np.mean((-z * g)[free]))
    else:
        zg = -z * g
        up_mask = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
        low_mask = ((z < 0) & (a < C)) | ((z > 0) & (a > 0))
        hi = float(np.max(np.where(up_mask, zg, -np.inf)))
        lo = float(np.min(np.where(low_mask, zg, np.inf)))
        b = 0.5 * (hi + lo)

    keep = np.abs(beta) > 1e-12
    return SvrModel(
        support_vectors=X[keep].copy(),
        dual_coef=beta[keep].copy(),
        bias=b,
        gamma=config.gamma,
        converged=bool(gap <= config.tol),
        kkt_gap=float(max(gap, 0.0)),
        iterations=it,
        objective_curve=curve,
    )


def svr_predict(model: SvrModel, X: np.ndarray) -> np.ndarray:
    """f(x) = sum_i beta_i k(sv_i, x) + b."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.support_vectors.size == 0:
        return np.full(X.shape[0], model.bias)
    k = rbf_kernel(X, model.support_vectors, model.gamma)
    return k @ model.dual_coef + model.bias


def svr_dual_objective(model_or_beta, X: np.ndarray, y: np.ndarray, config: SvrConfig) -> float:
    """Dual objective W(beta) = -1/2 b'Kb - eps*||b||_1 + y'b (maximized form)."""
    beta = model_or_beta if isinstance(model_or_beta, np.ndarray) else model_or_beta.dual_coef
    K = rbf_kernel(X, X, config.gamma)
    return float(
        -0.5 * beta @ K @ beta - config.epsilon_tube * np.sum(np.abs(beta)) + y @ beta
    )
