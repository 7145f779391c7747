"""Seeded random-search hyperparameter optimization with median pruning.

Each trial samples uniformly from the family's search space (log-uniform
for learning rate and weight decay) and is scored by mean weighted F1 over
stratified cross-validation folds.  A trial whose running fold-mean drops
below the median running mean of already-completed trials at the same fold
count is pruned.  Ties on the final mean resolve to the lowest trial index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evaluation import confusion_matrix, f1_scores
from .imbalance import class_frequencies
from .tabresnet import ResNetConfig, hidden_dim_bounds, nn_fit
from .trees import ForestParams, GbtParams, TreeParams, dt_fit, gbt_fit, rf_fit
from .weighting import compute_weights

__all__ = ["HpoSpec", "TrialRecord", "HpoResult", "sample_params", "stratified_kfold", "hpo_random_search"]

FAMILIES = ("dt", "rf", "gbt", "tabresnet")

# fixed fractions offered alongside sqrt/log2 for forest feature subsampling
_RF_FRACTIONS = (0.3, 0.5, 0.7, 1.0)


@dataclass(frozen=True)
class HpoSpec:
    n_trials: int = 25
    cv_folds: int = 5
    seed: int = 42
    # fields fixed after sampling, e.g. {"max_epochs": 40} for tabresnet
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")


@dataclass
class TrialRecord:
    index: int
    params: dict
    fold_scores: list
    status: str  # "completed" | "pruned"

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.fold_scores)) if self.fold_scores else float("-inf")


@dataclass
class HpoResult:
    family: str
    best_params: dict
    best_score: float
    best_trial: int
    trials: list


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def sample_params(family: str, rng: np.random.Generator, n_features: int) -> dict:
    """Draw one configuration from the family's search space."""
    if family == "dt":
        return {
            "max_depth": int(rng.integers(2, 33)),
            "min_samples_split": int(rng.integers(2, 51)),
            "min_samples_leaf": int(rng.integers(1, 21)),
            "criterion": str(rng.choice(["gini", "entropy"])),
        }
    if family == "rf":
        kind = int(rng.integers(0, 3))
        if kind == 0:
            max_features = "sqrt"
        elif kind == 1:
            max_features = "log2"
        else:
            max_features = float(rng.choice(_RF_FRACTIONS))
        return {
            "n_estimators": int(rng.integers(100, 1001)),
            "max_depth": int(rng.integers(3, 26)),
            "min_samples_split": int(rng.integers(2, 51)),
            "min_samples_leaf": int(rng.integers(1, 21)),
            "criterion": str(rng.choice(["gini", "entropy"])),
            "max_features": max_features,
        }
    if family == "gbt":
        return {
            "n_estimators": int(rng.integers(200, 1201)),
            "learning_rate": _log_uniform(rng, 0.01, 0.3),
            "max_depth": int(rng.integers(3, 13)),
            "subsample": float(rng.uniform(0.6, 1.0)),
            "colsample": float(rng.uniform(0.5, 1.0)),
            "reg_alpha": float(rng.uniform(0.0, 5.0)),
            "reg_lambda": float(rng.uniform(0.0, 5.0)),
        }
    if family == "tabresnet":
        lo, hi = hidden_dim_bounds(n_features)
        return {
            "learning_rate": _log_uniform(rng, 1e-6, 1e-1),
            "weight_decay": _log_uniform(rng, 1e-7, 1e-2),
            "batch_size": int(rng.integers(32, 1025)),
            "n_blocks": int(rng.integers(1, 5)),
            "hidden_dim": int(rng.integers(lo, hi + 1)),
            "use_reduction": bool(rng.integers(0, 2)),
        }
    raise ValueError("unknown family %r (expected one of %s)" % (family, ", ".join(FAMILIES)))


def stratified_kfold(y: np.ndarray, n_folds: int, seed: int) -> list:
    """Index arrays of ``n_folds`` class-balanced folds.

    Per class the (shuffled) indices are dealt round-robin, so fold sizes
    differ by at most one sample per class.  Every class needs at least
    ``n_folds`` samples.
    """
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(n_folds)]
    for k in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == k))
        if idx.size < n_folds:
            raise ValueError("class %d has %d samples; need >= %d to form folds" % (k, idx.size, n_folds))
        for f in range(n_folds):
            folds[f].append(idx[f::n_folds])
    return [np.sort(np.concatenate(parts)) for parts in folds]


def fit_family(family: str, x, y, weights, params: dict, n_classes: int, seed: int, x_val=None, y_val=None):
    """Uniform fit entry point used by HPO and the bench harness."""
    if family == "dt":
        return dt_fit(x, y, weights, TreeParams(**params), n_classes=n_classes, seed=seed)
    if family == "rf":
        return rf_fit(x, y, weights, ForestParams(**params), n_classes=n_classes, seed=seed)
    if family == "gbt":
        return gbt_fit(x, y, weights, GbtParams(**params), n_classes=n_classes, seed=seed)
    if family == "tabresnet":
        if x_val is None or y_val is None:
            raise ValueError("tabresnet requires a validation split for early stopping")
        cfg = ResNetConfig(
            n_features=np.asarray(x).shape[1],
            n_classes=n_classes,
            seed=seed,
            **params,
        )
        return nn_fit(x, y, weights, cfg, x_val, y_val)
    raise ValueError("unknown family %r (expected one of %s)" % (family, ", ".join(FAMILIES)))


def _fold_score(family, x, y, n_classes, params, strategy, beta, train_idx, val_idx, seed) -> float:
    dist = class_frequencies(y[train_idx])
    if dist.n_classes != n_classes:
        raise ValueError("a class is missing from one CV training fold; use fewer folds")
    w = compute_weights(dist, strategy, beta=beta)
    model = fit_family(
        family,
        x[train_idx],
        y[train_idx],
        w,
        params,
        n_classes,
        seed,
        x_val=x[val_idx],
        y_val=y[val_idx],
    )
    pred = model.predict(x[val_idx])
    return f1_scores(confusion_matrix(y[val_idx], pred, n_classes=n_classes)).weighted


def hpo_random_search(
    family: str,
    x,
    y,
    spec: HpoSpec | None = None,
    strategy: str = "none",
    beta: float = 0.9999,
    n_classes: int | None = None,
) -> HpoResult:
    """Random-search HPO for one model family on one dataset.

    Class weights follow ``strategy`` and are recomputed on each fold's
    training portion.  For tabresnet the held-out fold doubles as the
    early-stopping validation split, matching the validation-F1 objective.
    """
    spec = spec or HpoSpec()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    folds = stratified_kfold(y, spec.cv_folds, spec.seed)
    all_idx = np.arange(y.size)
    rng = np.random.default_rng(spec.seed)

    trials: list = []
    # running fold-means of completed trials, keyed by fold count
    completed_running: dict = {f: [] for f in range(spec.cv_folds)}
    best_mean = -np.inf
    best_trial = -1
    best_params: dict = {}
    for t in range(spec.n_trials):
        params = sample_params(family, rng, x.shape[1])
        params.update(spec.overrides)
        scores: list = []
        pruned = False
        for f, fold in enumerate(folds):
            train_idx = np.setdiff1d(all_idx, fold, assume_unique=True)
            scores.append(
                _fold_score(family, x, y, n_classes, params, strategy, beta, train_idx, fold, spec.seed)
            )
            running = float(np.mean(scores))
            is_last = f == spec.cv_folds - 1
            if not is_last and completed_running[f] and running < float(np.median(completed_running[f])):
                pruned = True
                break
        record = TrialRecord(index=t, params=params, fold_scores=scores, status="pruned" if pruned else "completed")
        trials.append(record)
        if not pruned:
            for f in range(spec.cv_folds):
                completed_running[f].append(float(np.mean(scores[: f + 1])))
            if record.mean_score > best_mean:
                best_mean = record.mean_score
                best_trial = t
                best_params = dict(params)
    if best_trial < 0:
        raise RuntimeError("no trial completed; pruning removed everything")
    return HpoResult(
        family=family,
        best_params=best_params,
        best_score=float(best_mean),
        best_trial=best_trial,
        trials=trials,
    )
