"""Confusion-matrix based evaluation: accuracy and per-class / aggregate F1.

All zero-denominator cases (empty class, never-predicted class) resolve to
0.0 rather than NaN so aggregates stay defined on degenerate splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["F1Summary", "confusion_matrix", "accuracy", "f1_scores"]


@dataclass(frozen=True)
class F1Summary:
    """Per-class F1 plus the two standard aggregates."""

    per_class: np.ndarray
    macro: float        # unweighted mean over classes
    weighted: float     # support-weighted mean over classes


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> np.ndarray:
    """K x K matrix with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise ValueError("y_true and y_pred must be matching non-empty 1-d vectors")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    if y_true.min() < 0 or y_pred.min() < 0:
        raise ValueError("labels must be non-negative")
    if max(y_true.max(), y_pred.max()) >= n_classes:
        raise ValueError("labels out of range for %d classes" % n_classes)
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def accuracy(cm: np.ndarray) -> float:
    """Fraction of samples on the confusion-matrix diagonal."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm) / total)


def f1_scores(cm: np.ndarray) -> F1Summary:
    """Per-class F1 = 2PR/(P+R) with 0/0 -> 0, plus macro and weighted means.

    The weighted aggregate weights each class by its true-label support
    (confusion-matrix row sum).
    """
    cm = np.asarray(cm, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    tp = np.diag(cm)
    support = cm.sum(axis=1)          # true counts per class
    predicted = cm.sum(axis=0)        # predicted counts per class
    # F1 = 2TP / (2TP + FP + FN); denominator zero only when the class is
    # absent from both truth and prediction.
    denom = support + predicted
    f1 = np.divide(2.0 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    total = support.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return F1Summary(
        per_class=f1,
        macro=float(f1.mean()),
        weighted=float(np.sum(f1 * support) / total),
    )
