"""CART-style binary classification tree with rpart-like hyperparameters.

Greedy Gini splitting; a split is kept only when it reduces the root-scaled
impurity by at least ``cp``. ``min_split`` is the smallest node a split may
be attempted in, ``max_depth`` bounds the node depth. Absent feature values
(NaN) are routed to the branch holding the majority of the node's present
rows, and the routing is recorded for prediction time. Surrogate splits and
cost-complexity post-pruning are intentionally not implemented.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class EmptyData(ValueError):
    """Cannot fit a tree on zero rows."""


class UnknownFeature(KeyError):
    """Prediction input lacks a feature the tree splits on."""


@dataclass(frozen=True)
class TreeParams:
    cp: float
    max_depth: int
    min_split: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.cp <= 0:
            raise ValueError("cp must be > 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_split < 2:
            raise ValueError("min_split must be >= 2")


# tuning distributions: cp log-uniform, the rest uniform integers
CP_RANGE = (1e-9, 1e-7)
MAX_DEPTH_RANGE = (1, 20)
MIN_SPLIT_RANGE = (20, 80)


def sample_params(rng: np.random.Generator, seed: int = 0) -> TreeParams:
    log_lo, log_hi = math.log10(CP_RANGE[0]), math.log10(CP_RANGE[1])
    return TreeParams(
        cp=float(10.0 ** rng.uniform(log_lo, log_hi)),
        max_depth=int(rng.integers(MAX_DEPTH_RANGE[0], MAX_DEPTH_RANGE[1] + 1)),
        min_split=int(rng.integers(MIN_SPLIT_RANGE[0], MIN_SPLIT_RANGE[1] + 1)),
        seed=seed,
    )


@dataclass
class TreeNode:
    probability: float  # training positive fraction at this node
    n: int
    depth: int
    feature: str | None = None
    feature_index: int | None = None
    threshold: float | None = None
    missing_left: bool | None = None
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class TreeModel:
    nodes: list[TreeNode]
    feature_names: tuple[str, ...]
    params: TreeParams
    n_train: int

    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def splits(self) -> dict[str, tuple[str, float]]:
        """Path -> (feature, threshold) for every internal node."""
        out: dict[str, tuple[str, float]] = {}

        def walk(idx: int, path: str) -> None:
            node = self.nodes[idx]
            if node.is_leaf:
                return
            out[path] = (node.feature, node.threshold)
            walk(node.left, path + "L")
            walk(node.right, path + "R")

        walk(0, "")
        return out


def _gini(pos: float, n: float) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def fit(
    X: np.ndarray,
    y: Sequence[bool],
    params: TreeParams,
    feature_names: Sequence[str] | None = None,
) -> TreeModel:
    """Fit on a (rows, features) matrix; NaN marks absent values."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    y_arr = np.asarray(y, dtype=bool)
    n, d = X.shape
    if n == 0:
        raise EmptyData("no training rows")
    if len(y_arr) != n:
        raise ValueError("X and y length mismatch")
    if feature_names is None:
        feature_names = tuple(f"f{i}" for i in range(d))
    else:
        feature_names = tuple(feature_names)
    root_gini = _gini(float(y_arr.sum()), float(n))
    nodes: list[TreeNode] = []

    def build(idx: np.ndarray, depth: int) -> int:
        node_id = len(nodes)
        sub_y = y_arr[idx]
        n_node = len(idx)
        pos = float(sub_y.sum())
        node = TreeNode(probability=pos / n_node, n=n_node, depth=depth)
        nodes.append(node)
        if (
            n_node < params.min_split
            or depth >= params.max_depth
            or pos == 0.0
            or pos == float(n_node)
        ):
            return node_id
        best = _best_split(X, y_arr, idx)
        if best is None:
            return node_id
        fi, threshold, missing_left, improvement, left_idx, right_idx = best
        # rpart-style complexity gate on the root-scaled improvement
        if root_gini <= 0 or improvement / (root_gini * n) < params.cp:
            return node_id
        node.feature = feature_names[fi]
        node.feature_index = fi
        node.threshold = threshold
        node.missing_left = missing_left
        node.left = build(left_idx, depth + 1)
        node.right = build(right_idx, depth + 1)
        return node_id

    build(np.arange(n), 0)
    return TreeModel(nodes=nodes, feature_names=feature_names, params=params, n_train=n)


def _best_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray):
    """Best (feature, threshold) by Gini improvement.

    Returns (feature_index, threshold, missing_left, improvement_weighted,
    left_idx, right_idx) or None. The improvement is weighted by the node
    row count so it composes into the tree-level impurity reduction.
    Ties keep the lowest feature index, then the lowest threshold.
    """
    n_node = len(idx)
    sub_y = y[idx].astype(float)
    node_gini = _gini(sub_y.sum(), n_node)
    best = None
    best_improvement = 0.0
    for fi in range(X.shape[1]):
        col = X[idx, fi]
        present = ~np.isnan(col)
        n_absent = int((~present).sum())
        vals = col[present]
        if len(vals) < 2:
            continue
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = sub_y[present][order]
        distinct = np.nonzero(sv[:-1] != sv[1:])[0]
        if len(distinct) == 0:
            continue
        cum_pos = np.cumsum(sy)
        total_pos_present = cum_pos[-1]
        absent_pos = sub_y[~present].sum()
        n_left_present = distinct + 1.0
        n_right_present = len(sv) - n_left_present
        pos_left = cum_pos[distinct]
        pos_right = total_pos_present - pos_left
        # absent rows follow the side with more present rows (ties go left)
        goes_left = n_left_present >= n_right_present
        n_left = n_left_present + np.where(goes_left, n_absent, 0)
        n_right = n_right_present + np.where(goes_left, 0, n_absent)
        p_left = pos_left + np.where(goes_left, absent_pos, 0.0)
        p_right = pos_right + np.where(goes_left, 0.0, absent_pos)
        with np.errstate(invalid="ignore", divide="ignore"):
            g_left = 2.0 * (p_left / n_left) * (1.0 - p_left / n_left)
            g_right = 2.0 * (p_right / n_right) * (1.0 - p_right / n_right)
        g_left = np.where(n_left == 0, 0.0, g_left)
        g_right = np.where(n_right == 0, 0.0, g_right)
        child = (n_left * g_left + n_right * g_right) / n_node
        improvements = n_node * (node_gini - child)
        # ties broken toward the lowest threshold: take the first candidate
        # within epsilon of the feature's best (float association noise)
        k = int(np.argmax(improvements >= improvements.max() - 1e-12))
        if improvements[k] > best_improvement + 1e-12:
            threshold = float((sv[distinct[k]] + sv[distinct[k] + 1]) / 2.0)
            left_mask = np.where(present, col <= threshold, bool(goes_left[k]))
            best = (
                fi,
                threshold,
                bool(goes_left[k]),
                float(improvements[k]),
                idx[left_mask],
                idx[~left_mask],
            )
            best_improvement = float(improvements[k])
    if best is not None and best_improvement <= 1e-12:
        return None
    return best


def predict_proba(model: TreeModel, x: Mapping[str, float | None] | Sequence) -> float:
    """Leaf's training positive fraction for one input row."""
    node = model.nodes[0]
    while not node.is_leaf:
        if isinstance(x, Mapping):
            if node.feature not in x:
                raise UnknownFeature(node.feature)
            value = x[node.feature]
        else:
            value = x[node.feature_index]
        if value is None or (isinstance(value, float) and math.isnan(value)):
            go_left = node.missing_left
        else:
            go_left = value <= node.threshold
        node = model.nodes[node.left if go_left else node.right]
    return node.probability


def predict_many(model: TreeModel, X: np.ndarray) -> np.ndarray:
    return np.array([predict_proba(model, row) for row in np.asarray(X, dtype=float)])


def save_model(model: TreeModel, path: str | Path) -> None:
    payload = {
        "feature_names": list(model.feature_names),
        "n_train": model.n_train,
        "params": {
            "cp": model.params.cp,
            "max_depth": model.params.max_depth,
            "min_split": model.params.min_split,
            "seed": model.params.seed,
        },
        "nodes": [
            {
                "probability": n.probability,
                "n": n.n,
                "depth": n.depth,
                "feature": n.feature,
                "feature_index": n.feature_index,
                "threshold": n.threshold,
                "missing_left": n.missing_left,
                "left": n.left,
                "right": n.right,
            }
            for n in model.nodes
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TreeModel:
    obj = json.loads(Path(path).read_text("utf-8"))
    return TreeModel(
        nodes=[TreeNode(**raw) for raw in obj["nodes"]],
        feature_names=tuple(obj["feature_names"]),
        params=TreeParams(**obj["params"]),
        n_train=int(obj["n_train"]),
    )


@dataclass(frozen=True)
class Trial:
    index: int
    params: TreeParams
    mean_auc: float
    sd_auc: float
    fold_aucs: tuple[float, ...]


def random_search(
    evaluate: Callable[[TreeParams], Sequence[float]],
    trials: int,
    seed: int,
) -> tuple[TreeParams, list[Trial]]:
    """Sample ``trials`` parameter sets and return the argmax by mean CV AUC.

    ``evaluate`` maps params to per-fold AUCs. The log supports the
    cumulative-best curve; ties keep the earliest trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    log: list[Trial] = []
    best: Trial | None = None
    for t in range(trials):
        params = sample_params(rng, seed=seed)
        fold_aucs = tuple(float(a) for a in evaluate(params))
        mean = sum(fold_aucs) / len(fold_aucs)
        sd = math.sqrt(sum((a - mean) ** 2 for a in fold_aucs) / len(fold_aucs))
        trial = Trial(index=t, params=params, mean_auc=mean, sd_auc=sd, fold_aucs=fold_aucs)
        log.append(trial)
        if best is None or trial.mean_auc > best.mean_auc:
            best = trial
    return best.params, log


def cumulative_best(log: Sequence[Trial]) -> list[float]:
    out: list[float] = []
    cur = -math.inf
    for trial in log:
        cur = max(cur, trial.mean_auc)
        out.append(cur)
    return out
