"""Scalar measures of class imbalance for a label distribution.

Three complementary views of the same counts vector:

* ``cvcf``  -- coefficient of variation of class frequencies (0 = balanced,
  grows with skew, unbounded).
* ``imbalance_ratio`` -- largest class count over smallest (1 = balanced).
* ``necd``  -- normalized entropy of the class distribution (1 = balanced,
  0 = all mass on one class).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LabelDistribution",
    "ImbalanceReport",
    "class_frequencies",
    "cvcf",
    "imbalance_ratio",
    "necd",
    "imbalance_report",
]


@dataclass(frozen=True)
class LabelDistribution:
    """Per-class sample counts plus derived totals and frequencies.

    Counts may contain zeros when constructed directly (useful for edge-case
    analysis); ``class_frequencies`` never produces zero counts.
    """

    counts: np.ndarray
    class_ids: np.ndarray = field(default=None)  # original dense label ids

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise ValueError("counts must be a 1-d vector")
        if counts.size < 2:
            raise ValueError("at least two classes required, got %d" % counts.size)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if counts.sum() <= 0:
            raise ValueError("total sample count must be positive")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        ids = self.class_ids
        if ids is None:
            ids = np.arange(counts.size, dtype=np.int64)
        else:
            ids = np.asarray(ids, dtype=np.int64)
            if ids.shape != counts.shape:
                raise ValueError("class_ids must align with counts")
        ids.setflags(write=False)
        object.__setattr__(self, "class_ids", ids)

    @property
    def n_classes(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()


@dataclass(frozen=True)
class ImbalanceReport:
    """The three imbalance measures evaluated on one label distribution."""

    cvcf: float
    imbalance_ratio: float
    necd: float


def class_frequencies(labels) -> LabelDistribution:
    """Observed label distribution of a dense integer label vector.

    Classes with zero observed count are excluded; the surviving original
    label ids are kept in ``class_ids`` (ascending order).
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d vector")
    ids, counts = np.unique(labels, return_counts=True)
    if ids.size < 2:
        raise ValueError("at least two observed classes required, got %d" % ids.size)
    return LabelDistribution(counts=counts, class_ids=ids)


def cvcf(dist: LabelDistribution) -> float:
    """Coefficient of variation of class frequencies.

    Population standard deviation of the frequency vector divided by its
    mean 1/K.  Zero for a perfectly balanced distribution.
    """
    f = dist.frequencies
    return float(np.std(f) / np.mean(f))


def imbalance_ratio(dist: LabelDistribution) -> float:
    """Largest class count divided by smallest.  Requires all counts > 0."""
    counts = dist.counts
    if np.any(counts == 0):
        raise ValueError("imbalance ratio undefined when a class count is zero")
    return float(counts.max() / counts.min())


def necd(dist: LabelDistribution) -> float:
    """Normalized entropy of the class distribution, in [0, 1].

    Shannon entropy of the frequencies over its maximum log(K).  The
    0*log(0) = 0 convention makes zero-count classes contribute nothing.
    Base-invariant: any logarithm base gives the same ratio.
    """
    f = dist.frequencies
    nz = f[f > 0]
    entropy = float(-np.sum(nz * np.log(nz))) + 0.0  # normalizes -0.0
    return entropy / float(np.log(dist.n_classes))


def imbalance_report(dist: LabelDistribution) -> ImbalanceReport:
    """All three measures at once.

    ``imbalance_ratio`` is NaN when some class has zero count (the other two
    remain defined there).
    """
    try:
        ir = imbalance_ratio(dist)
    except ValueError:
        ir = float("nan")
    return ImbalanceReport(cvcf=cvcf(dist), imbalance_ratio=ir, necd=necd(dist))
