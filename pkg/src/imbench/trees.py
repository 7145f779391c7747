"""Tree-based classifiers built from scratch with class-weight support.

Class weights enter as per-sample masses: impurity statistics, leaf
distributions, and boosting gradients all accumulate w_{y_i} instead of 1.
Split search is exact over midpoints of sorted unique feature values; equal
scores resolve to the lowest feature index, then the lowest threshold, so
training is fully deterministic given the seed.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .losses import one_hot, softmax

__all__ = [
    "TreeParams",
    "ForestParams",
    "GbtParams",
    "TreeNode",
    "DecisionTreeModel",
    "RandomForestModel",
    "GradientBoostedModel",
    "dt_fit",
    "rf_fit",
    "gbt_fit",
    "save_model",
    "load_model",
]

_HESSIAN_FLOOR = 1e-16
_CRITERIA = ("gini", "entropy")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 12
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    criterion: str = "gini"

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.criterion not in _CRITERIA:
            raise ValueError("criterion must be one of %s" % (_CRITERIA,))


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_depth: int = 12
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    criterion: str = "gini"
    max_features: object = "sqrt"   # "sqrt" | "log2" | fraction in (0, 1]
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        TreeParams(self.max_depth, self.min_samples_split, self.min_samples_leaf, self.criterion)
        mf = self.max_features
        if isinstance(mf, str):
            if mf not in ("sqrt", "log2"):
                raise ValueError("max_features string must be 'sqrt' or 'log2'")
        else:
            mf = float(mf)
            if not (0.0 < mf <= 1.0):
                raise ValueError("max_features fraction must lie in (0, 1]")
            object.__setattr__(self, "max_features", mf)


@dataclass(frozen=True)
class GbtParams:
    n_estimators: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    subsample: float = 1.0
    colsample: float = 1.0
    reg_alpha: float = 0.0
    reg_lambda: float = 1.0

    def __post_init__(self):
        if self.n_estimators < 0:
            raise ValueError("n_estimators must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not (0.0 < self.subsample <= 1.0):
            raise ValueError("subsample must lie in (0, 1]")
        if not (0.0 < self.colsample <= 1.0):
            raise ValueError("colsample must lie in (0, 1]")
        if self.reg_alpha < 0 or self.reg_lambda < 0:
            raise ValueError("regularization terms must be non-negative")


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (scores).

    Leaf scores are a class-probability vector for classification trees and
    a single-element raw-margin array for boosted regression trees.
    """

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    scores: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.scores is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"scores": [float(s) for s in np.atleast_1d(self.scores)]}
        return {
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @staticmethod
    def from_dict(obj: dict) -> "TreeNode":
        if "scores" in obj:
            return TreeNode(scores=np.asarray(obj["scores"], dtype=np.float64))
        return TreeNode(
            feature=int(obj["feature"]),
            threshold=float(obj["threshold"]),
            left=TreeNode.from_dict(obj["left"]),
            right=TreeNode.from_dict(obj["right"]),
        )


def _weight_vector(w, n_classes: int) -> np.ndarray:
    wv = np.asarray(getattr(w, "weights", w), dtype=np.float64)
    if wv.shape != (n_classes,):
        raise ValueError("expected %d class weights, got shape %s" % (n_classes, wv.shape))
    return wv


def _impurity_rows(mass: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity of each row of a (c, K) class-mass matrix."""
    p = mass / totals[:, None]
    if criterion == "gini":
        return 1.0 - np.sum(p * p, axis=1)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return -out.sum(axis=1)


def _build_classification_tree(
    x: np.ndarray,
    masses: np.ndarray,
    idx: np.ndarray,
    depth: int,
    params,
    n_sub_features: int,
    rng: np.random.Generator | None,
    parent_probs: np.ndarray | None,
) -> TreeNode:
    node_masses = masses[idx]
    total = node_masses.sum(axis=0)
    m_total = total.sum()
    if m_total <= 0.0:
        # only reachable with pathological weights; inherit the parent view
        return TreeNode(scores=parent_probs.copy())
    probs = total / m_total
    impurity = _impurity_rows(total[None, :], np.array([m_total]), params.criterion)[0]
    if depth >= params.max_depth or idx.size < params.min_samples_split or impurity <= 0.0:
        return TreeNode(scores=probs)

    d = x.shape[1]
    if n_sub_features < d:
        feats = np.sort(rng.choice(d, size=n_sub_features, replace=False))
    else:
        feats = np.arange(d)

    min_leaf = params.min_samples_leaf
    best_score = np.inf
    best_feature = -1
    best_threshold = 0.0
    for f in feats:
        v = x[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cut = np.flatnonzero(vs[1:] > vs[:-1])
        if min_leaf > 1:
            left_n = cut + 1
            cut = cut[(left_n >= min_leaf) & (idx.size - left_n >= min_leaf)]
        if cut.size == 0:
            continue
        cum = np.cumsum(node_masses[order], axis=0)
        left = cum[cut]
        right = total[None, :] - left
        m_left = left.sum(axis=1)
        m_right = right.sum(axis=1)
        score = m_left * _impurity_rows(left, m_left, params.criterion) + m_right * _impurity_rows(
            right, m_right, params.criterion
        )
        i = int(np.argmin(score))  # first occurrence -> lowest threshold
        if score[i] < best_score:
            best_score = float(score[i])
            best_feature = int(f)
            best_threshold = 0.5 * (vs[cut[i]] + vs[cut[i] + 1])
    if best_feature < 0:
        return TreeNode(scores=probs)

    go_left = x[idx, best_feature] <= best_threshold
    left_node = _build_classification_tree(
        x, masses, idx[go_left], depth + 1, params, n_sub_features, rng, probs
    )
    right_node = _build_classification_tree(
        x, masses, idx[~go_left], depth + 1, params, n_sub_features, rng, probs
    )
    return TreeNode(feature=best_feature, threshold=float(best_threshold), left=left_node, right=right_node)


def _apply_tree(root: TreeNode, x: np.ndarray, width: int) -> np.ndarray:
    """Leaf scores for every row, via index-partitioned traversal."""
    out = np.empty((x.shape[0], width))
    stack = [(root, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.scores
            continue
        go_left = x[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


class DecisionTreeModel:
    """A single weighted CART-style tree with probability leaves."""

    family = "dt"

    def __init__(self, root: TreeNode, params: TreeParams, n_classes: int, train_seconds: float = 0.0):
        self.root = root
        self.params = params
        self.n_classes = n_classes
        self.train_seconds = train_seconds

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return _apply_tree(self.root, x, self.n_classes)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_classes": self.n_classes,
            "params": asdict(self.params),
            "tree": self.root.to_dict(),
        }

    @staticmethod
    def from_dict(obj: dict) -> "DecisionTreeModel":
        return DecisionTreeModel(
            root=TreeNode.from_dict(obj["tree"]),
            params=TreeParams(**obj["params"]),
            n_classes=int(obj["n_classes"]),
        )


def dt_fit(x, y, weights, params: TreeParams | None = None, n_classes: int | None = None, seed: int = 0) -> DecisionTreeModel:
    """Fit a weighted decision tree.  ``seed`` is accepted for interface
    symmetry; a plain tree consumes no randomness."""
    del seed
    params = params or TreeParams()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    wv = _weight_vector(weights, n_classes)
    t0 = time.perf_counter()
    masses = one_hot(y, n_classes) * wv[y][:, None]
    root = _build_classification_tree(
        x, masses, np.arange(x.shape[0]), 0, params, x.shape[1], None, None
    )
    return DecisionTreeModel(root, params, n_classes, train_seconds=time.perf_counter() - t0)


def _resolve_max_features(spec, d: int) -> int:
    if spec == "sqrt":
        return max(1, int(math.sqrt(d)))
    if spec == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    return max(1, min(d, int(math.ceil(float(spec) * d))))


class RandomForestModel:
    """Bagged weighted trees with per-split feature subsampling (soft vote)."""

    family = "rf"

    def __init__(self, trees: list, params: ForestParams, n_classes: int, train_seconds: float = 0.0):
        self.trees = trees
        self.params = params
        self.n_classes = n_classes
        self.train_seconds = train_seconds

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros((x.shape[0], self.n_classes))
        for root in self.trees:
            acc += _apply_tree(root, x, self.n_classes)
        return acc / len(self.trees)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_classes": self.n_classes,
            "params": asdict(self.params),
            "trees": [t.to_dict() for t in self.trees],
        }

    @staticmethod
    def from_dict(obj: dict) -> "RandomForestModel":
        return RandomForestModel(
            trees=[TreeNode.from_dict(t) for t in obj["trees"]],
            params=ForestParams(**obj["params"]),
            n_classes=int(obj["n_classes"]),
        )


def rf_fit(x, y, weights, params: ForestParams | None = None, n_classes: int | None = None, seed: int = 0) -> RandomForestModel:
    """Fit a random forest.  Per-tree seeds derive deterministically from
    (seed, tree index) so refits replay exactly."""
    params = params or ForestParams()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    wv = _weight_vector(weights, n_classes)
    t0 = time.perf_counter()
    n, d = x.shape
    n_sub = _resolve_max_features(params.max_features, d)
    tree_params = TreeParams(
        params.max_depth, params.min_samples_split, params.min_samples_leaf, params.criterion
    )
    children = np.random.SeedSequence(seed).spawn(params.n_estimators)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        masses = one_hot(y[rows], n_classes) * wv[y[rows]][:, None]
        root = _build_classification_tree(
            x[rows], masses, np.arange(n), 0, tree_params, n_sub, rng, None
        )
        trees.append(root)
    return RandomForestModel(trees, params, n_classes, train_seconds=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Newton-boosted trees on the weighted categorical cross-entropy
# ---------------------------------------------------------------------------


def _build_regression_tree(
    x: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    idx: np.ndarray,
    depth: int,
    feats: np.ndarray,
    params: GbtParams,
) -> TreeNode:
    """Newton-step regression tree: leaves hold -soft(G, alpha)/(H + lambda)."""
    g_sum = float(g[idx].sum())
    h_sum = float(h[idx].sum())
    if depth >= params.max_depth or idx.size < 2:
        return TreeNode(scores=np.array([_newton_leaf(g_sum, h_sum, params)]))

    lam = params.reg_lambda
    best_score = np.inf
    best_feature = -1
    best_threshold = 0.0
    for f in feats:
        v = x[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cut = np.flatnonzero(vs[1:] > vs[:-1])
        if cut.size == 0:
            continue
        gl = np.cumsum(g[idx][order])[cut]
        hl = np.cumsum(h[idx][order])[cut]
        gr = g_sum - gl
        hr = h_sum - hl
        score = -(gl * gl) / np.maximum(hl + lam, _HESSIAN_FLOOR) - (gr * gr) / np.maximum(
            hr + lam, _HESSIAN_FLOOR
        )
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_feature = int(f)
            best_threshold = 0.5 * (vs[cut[i]] + vs[cut[i] + 1])
    if best_feature < 0:
        return TreeNode(scores=np.array([_newton_leaf(g_sum, h_sum, params)]))

    go_left = x[idx, best_feature] <= best_threshold
    return TreeNode(
        feature=best_feature,
        threshold=float(best_threshold),
        left=_build_regression_tree(x, g, h, idx[go_left], depth + 1, feats, params),
        right=_build_regression_tree(x, g, h, idx[~go_left], depth + 1, feats, params),
    )


def _newton_leaf(g_sum: float, h_sum: float, params: GbtParams) -> float:
    alpha = params.reg_alpha
    if g_sum > alpha:
        num = g_sum - alpha
    elif g_sum < -alpha:
        num = g_sum + alpha
    else:
        return 0.0
    return -num / max(h_sum + params.reg_lambda, _HESSIAN_FLOOR)


def _leaf_hessian_sums(root: TreeNode, x: np.ndarray, h: np.ndarray, idx: np.ndarray) -> list:
    sums = []
    stack = [(root, idx)]
    while stack:
        node, ids = stack.pop()
        if node.is_leaf:
            sums.append(float(h[ids].sum()))
            continue
        go_left = x[ids, node.feature] <= node.threshold
        stack.append((node.left, ids[go_left]))
        stack.append((node.right, ids[~go_left]))
    return sums


class GradientBoostedModel:
    """Multiclass Newton boosting: one regression tree per class per round."""

    family = "gbt"

    def __init__(
        self,
        rounds: list,
        log_priors: np.ndarray,
        params: GbtParams,
        n_classes: int,
        train_seconds: float = 0.0,
    ):
        self.rounds = rounds  # list of per-class tree lists (None = skipped tree)
        self.log_priors = np.asarray(log_priors, dtype=np.float64)
        self.params = params
        self.n_classes = n_classes
        self.train_seconds = train_seconds

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        margins = np.tile(self.log_priors, (x.shape[0], 1))
        lr = self.params.learning_rate
        for class_trees in self.rounds:
            for k, root in enumerate(class_trees):
                if root is not None:
                    margins[:, k] += lr * _apply_tree(root, x, 1)[:, 0]
        return margins

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.decision_function(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_classes": self.n_classes,
            "params": asdict(self.params),
            "log_priors": [float(v) for v in self.log_priors],
            "rounds": [
                [None if t is None else t.to_dict() for t in class_trees]
                for class_trees in self.rounds
            ],
        }

    @staticmethod
    def from_dict(obj: dict) -> "GradientBoostedModel":
        return GradientBoostedModel(
            rounds=[
                [None if t is None else TreeNode.from_dict(t) for t in class_trees]
                for class_trees in obj["rounds"]
            ],
            log_priors=np.asarray(obj["log_priors"], dtype=np.float64),
            params=GbtParams(**obj["params"]),
            n_classes=int(obj["n_classes"]),
        )


def gbt_fit(x, y, weights, params: GbtParams | None = None, n_classes: int | None = None, seed: int = 0) -> GradientBoostedModel:
    """Fit gradient-boosted trees on the weighted categorical cross-entropy.

    Per round and class k the tree regresses the Newton statistics
    g_i = w_{y_i} (p_{i,k} - [y_i = k]) and h_i = w_{y_i} p_{i,k} (1 - p_{i,k});
    margins start at the log class priors.  Rows are subsampled per round and
    feature columns per tree.
    """
    params = params or GbtParams()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    wv = _weight_vector(weights, n_classes)
    t0 = time.perf_counter()
    n, d = x.shape
    counts = np.bincount(y, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError("every class must appear in the training data")
    log_priors = np.log(counts / n)
    margins = np.tile(log_priors, (n, 1))
    y_hot = one_hot(y, n_classes)
    wy = wv[y]
    rng = np.random.default_rng(seed)
    n_rows = max(2, int(round(params.subsample * n)))
    n_cols = max(1, int(round(params.colsample * d)))
    rounds = []
    for round_idx in range(params.n_estimators):
        rows = np.sort(rng.choice(n, size=n_rows, replace=False)) if n_rows < n else np.arange(n)
        p = softmax(margins[rows])
        class_trees = []
        fitted_any = False
        for k in range(n_classes):
            g = wy[rows] * (p[:, k] - y_hot[rows, k])
            h = wy[rows] * p[:, k] * (1.0 - p[:, k])
            feats = np.sort(rng.choice(d, size=n_cols, replace=False)) if n_cols < d else np.arange(d)
            root = _build_regression_tree(x[rows], g, h, np.arange(rows.size), 0, feats, params)
            leaf_h = _leaf_hessian_sums(root, x[rows], h, np.arange(rows.size))
            if all(s < _HESSIAN_FLOOR for s in leaf_h):
                class_trees.append(None)
                continue
            margins[:, k] += params.learning_rate * _apply_tree(root, x, 1)[:, 0]
            class_trees.append(root)
            fitted_any = True
        if not fitted_any:
            warnings.warn(
                "boosting round %d skipped: all leaf hessian sums below %g"
                % (round_idx, _HESSIAN_FLOOR),
                RuntimeWarning,
            )
        rounds.append(class_trees)
    return GradientBoostedModel(rounds, log_priors, params, n_classes, train_seconds=time.perf_counter() - t0)


_MODEL_TYPES = {
    "dt": DecisionTreeModel,
    "rf": RandomForestModel,
    "gbt": GradientBoostedModel,
}


def save_model(model, path) -> None:
    """Write a fitted tree model to its JSON form (see README)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path):
    """Reload a model written by ``save_model``; predictions are identical."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    family = obj.get("family")
    if family not in _MODEL_TYPES:
        raise ValueError("unknown model family %r in %s" % (family, path))
    return _MODEL_TYPES[family].from_dict(obj)
