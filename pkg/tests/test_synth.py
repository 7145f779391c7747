"""Synthetic Gaussian-cluster datasets and their class-size profiles."""

import numpy as np
import pytest

from imbench import (
    ForestParams,
    SynthConfig,
    TreeParams,
    class_frequencies,
    counts_for_ratio,
    dt_fit,
    imbalance_ratio,
    power_law_counts,
    rf_fit,
    stratified_split,
    synth_generate,
)
from tests.conftest import make_blobs


class TestPowerLawCounts:
    def test_zero_exponent_is_balanced(self):
        np.testing.assert_array_equal(power_law_counts(400, 4, 0.0), [100] * 4)

    def test_counts_sum_and_floor(self, rng):
        for _ in range(25):
            n = int(rng.integers(50, 5000))
            k = int(rng.integers(2, 15))
            gamma = float(rng.uniform(0.0, 3.0))
            counts = power_law_counts(n, k, gamma)
            assert counts.sum() == n
            assert counts.min() >= 1
            assert len(counts) == k

    def test_counts_non_increasing(self):
        counts = power_law_counts(1000, 8, 1.5)
        assert np.all(np.diff(counts) <= 0)

    def test_imbalance_grows_with_exponent(self):
        ratios = []
        for gamma in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5):
            counts = power_law_counts(5000, 10, gamma)
            labels = np.repeat(np.arange(10), counts)
            ratios.append(imbalance_ratio(class_frequencies(labels)))
        assert np.all(np.diff(ratios) > 0)

    def test_too_small_sample_rejected(self):
        with pytest.raises(ValueError):
            power_law_counts(3, 4, 6.0)


class TestCountsForRatio:
    def test_ratio_one_is_balanced(self):
        counts = counts_for_ratio(800, 4, 1.0)
        assert counts.max() == counts.min()

    def test_target_ratio_is_hit(self):
        for ratio in (3.0, 10.0, 30.0, 100.0):
            counts = counts_for_ratio(10_000, 10, ratio)
            assert counts.sum() == 10_000
            achieved = counts.max() / counts.min()
            assert abs(achieved - ratio) / ratio < 0.12

    def test_sub_unit_ratio_rejected(self):
        with pytest.raises(ValueError):
            counts_for_ratio(100, 3, 0.5)


class TestSynthConfigValidation:
    def test_exactly_one_size_spec(self):
        with pytest.raises(ValueError, match="exactly one"):
            SynthConfig(n_samples=10, n_classes=2, n_features=2)
        with pytest.raises(ValueError, match="exactly one"):
            SynthConfig(
                n_samples=10, n_classes=2, n_features=2,
                class_counts=(5, 5), power_law_exponent=1.0,
            )

    def test_counts_must_sum(self):
        with pytest.raises(ValueError, match="sum"):
            SynthConfig(n_samples=10, n_classes=2, n_features=2, class_counts=(5, 6))

    def test_negative_separation_rejected(self):
        with pytest.raises(ValueError):
            SynthConfig(
                n_samples=10, n_classes=2, n_features=2,
                class_counts=(5, 5), cluster_separation=-1.0,
            )


class TestSynthGenerate:
    def test_counts_honored_exactly(self):
        data = make_blobs(300, 3, 5, 2.0, seed=0, counts=[150, 100, 50])
        np.testing.assert_array_equal(np.bincount(data.labels), [150, 100, 50])
        assert data.features.shape == (300, 5)

    def test_deterministic_per_seed(self):
        a = make_blobs(200, 4, 6, 1.5, seed=42)
        b = make_blobs(200, 4, 6, 1.5, seed=42)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_seed_changes_draw(self):
        a = make_blobs(200, 4, 6, 1.5, seed=42)
        b = make_blobs(200, 4, 6, 1.5, seed=43)
        assert not np.array_equal(a.features, b.features)

    def test_power_law_profile_used(self):
        data = make_blobs(1000, 5, 4, 2.0, seed=1, gamma=1.2)
        np.testing.assert_array_equal(
            np.bincount(data.labels), power_law_counts(1000, 5, 1.2)
        )

    def test_class_means_at_separation_distance(self):
        data = make_blobs(40_000, 2, 8, 5.0, seed=9)
        for k in range(2):
            mean = data.features[data.labels == k].mean(axis=0)
            np.testing.assert_allclose(np.linalg.norm(mean), 5.0, atol=0.15)

    def test_unit_cluster_variance(self):
        data = make_blobs(40_000, 2, 8, 5.0, seed=9)
        spread = data.features[data.labels == 0].std(axis=0, ddof=1)
        np.testing.assert_allclose(spread, 1.0, atol=0.05)

    def test_zero_separation_is_unlearnable_noise(self):
        data = make_blobs(2000, 2, 6, 0.0, seed=3)
        split = stratified_split(data, seed=0)
        model = dt_fit(
            data.features[split.train], data.labels[split.train],
            np.ones(2), params=TreeParams(max_depth=4),
        )
        test_acc = np.mean(model.predict(data.features[split.test]) == data.labels[split.test])
        assert test_acc < 0.62

    def test_wide_separation_is_easily_learnable(self):
        """Well-separated clusters: a shallow tree fits the training set and a
        small forest generalizes."""
        data = make_blobs(2000, 2, 6, 6.0, seed=5)
        split = stratified_split(data, seed=0)
        xtr, ytr = data.features[split.train], data.labels[split.train]
        tree = dt_fit(xtr, ytr, np.ones(2), params=TreeParams(max_depth=3))
        assert np.mean(tree.predict(xtr) == ytr) >= 0.95
        forest = rf_fit(
            xtr, ytr, np.ones(2),
            params=ForestParams(n_estimators=100, max_depth=6), seed=0,
        )
        test_acc = np.mean(forest.predict(data.features[split.test]) == data.labels[split.test])
        assert test_acc >= 0.95

    def test_more_features_than_classes_gives_orthogonal_means(self):
        data = make_blobs(60_000, 3, 10, 4.0, seed=11)
        means = np.stack([data.features[data.labels == k].mean(axis=0) for k in range(3)])
        gram = means @ means.T
        off_diag = gram[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off_diag) < 0.1 * gram.diagonal().min())
