"""Label-distribution bookkeeping and the three imbalance metrics."""

import numpy as np
import pytest
from scipy import stats

from imbench import (
    LabelDistribution,
    class_frequencies,
    cvcf,
    imbalance_ratio,
    imbalance_report,
    necd,
    power_law_counts,
)


def dist_of(counts):
    labels = np.repeat(np.arange(len(counts)), counts)
    return class_frequencies(labels)


class TestClassFrequencies:
    def test_two_balanced_classes(self):
        d = class_frequencies(np.array([0, 0, 1, 1]))
        np.testing.assert_array_equal(d.counts, [2, 2])
        np.testing.assert_allclose(d.frequencies, [0.5, 0.5])

    def test_three_to_one(self):
        d = class_frequencies(np.array([0, 0, 0, 1]))
        np.testing.assert_allclose(d.frequencies, [0.75, 0.25])

    def test_large_sample_matches_prior(self):
        """Empirical frequencies converge on the sampling prior."""
        rng = np.random.default_rng(0)
        labels = rng.choice(3, size=45_000, p=[0.9, 0.09, 0.01])
        d = class_frequencies(labels)
        np.testing.assert_allclose(d.frequencies, [0.9, 0.09, 0.01], atol=0.01)

    def test_absent_class_ids_are_not_counted(self):
        d = class_frequencies(np.array([0, 0, 2, 2, 2]))
        np.testing.assert_array_equal(d.counts, [2, 3])
        np.testing.assert_array_equal(d.class_ids, [0, 2])

    def test_frequencies_sum_to_one(self, rng):
        for _ in range(20):
            counts = rng.integers(1, 500, size=rng.integers(2, 12))
            d = dist_of(counts)
            assert abs(d.frequencies.sum() - 1.0) < 1e-12

    def test_empty_labels_error(self):
        with pytest.raises(ValueError):
            class_frequencies(np.array([], dtype=int))

    def test_single_class_error(self):
        with pytest.raises(ValueError):
            class_frequencies(np.zeros(10, dtype=int))


class TestCvcf:
    def test_uniform_is_zero(self):
        assert cvcf(dist_of([50, 50, 50])) == 0.0

    def test_75_25(self):
        # f = [0.75, 0.25], mean 0.5, population sd 0.25
        np.testing.assert_allclose(cvcf(dist_of([75, 25])), 0.5, atol=1e-12)

    def test_90_9_1(self):
        np.testing.assert_allclose(cvcf(dist_of([90, 9, 1])), 1.2061, atol=1e-4)

    def test_population_not_sample_std(self):
        """The denominator is K, not K-1."""
        counts = np.array([60, 30, 10])
        f = counts / counts.sum()
        expected = np.sqrt(np.mean((f - f.mean()) ** 2)) / f.mean()
        np.testing.assert_allclose(cvcf(dist_of(counts)), expected, rtol=1e-12)


class TestImbalanceRatio:
    def test_balanced_is_one(self):
        assert imbalance_ratio(dist_of([50, 50])) == 1.0

    def test_90_9_1(self):
        assert imbalance_ratio(dist_of([90, 9, 1])) == 90.0

    def test_zero_count_is_an_error(self):
        with pytest.raises(ValueError):
            imbalance_ratio(LabelDistribution(counts=np.array([90, 0])))


class TestNecd:
    def test_uniform_is_one(self):
        np.testing.assert_allclose(necd(dist_of([25, 25, 25, 25])), 1.0, atol=1e-12)

    def test_total_concentration_is_zero(self):
        assert necd(LabelDistribution(counts=np.array([100, 0]))) == 0.0

    def test_99_1(self):
        np.testing.assert_allclose(necd(dist_of([99, 1])), 0.0808, atol=1e-4)

    def test_base_invariance(self):
        """H/log K gives the same value in any log base."""
        d = dist_of([70, 20, 7, 3])
        f = d.frequencies
        base2 = -(f * np.log2(f)).sum() / np.log2(len(f))
        np.testing.assert_allclose(necd(d), base2, rtol=1e-12)


class TestMetricProperties:
    def test_scale_invariance(self, rng):
        for _ in range(10):
            counts = rng.integers(1, 200, size=rng.integers(2, 8))
            a, b = dist_of(counts), dist_of(counts * 7)
            assert cvcf(a) == cvcf(b)
            assert imbalance_ratio(a) == imbalance_ratio(b)
            assert necd(a) == necd(b)

    def test_permutation_invariance(self, rng):
        counts = np.array([120, 40, 9, 3])
        base = (cvcf(dist_of(counts)), imbalance_ratio(dist_of(counts)), necd(dist_of(counts)))
        for _ in range(5):
            perm = rng.permutation(counts)
            got = (cvcf(dist_of(perm)), imbalance_ratio(dist_of(perm)), necd(dist_of(perm)))
            np.testing.assert_allclose(got, base, rtol=1e-12)

    def test_bounds(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 10))
            counts = rng.integers(1, 1000, size=k)
            d = dist_of(counts)
            assert 0.0 <= cvcf(d) <= np.sqrt(k - 1) + 1e-12
            assert imbalance_ratio(d) >= 1.0
            assert 0.0 <= necd(d) <= 1.0 + 1e-12

    def test_two_class_monotone_coupling(self):
        """Shrinking the minority strictly raises IR/CVCF and lowers NECD."""
        n = 64
        irs, necds, cvcfs = [], [], []
        for m in range(n // 2, 0, -1):
            d = dist_of([n - m, m])
            irs.append(imbalance_ratio(d))
            necds.append(necd(d))
            cvcfs.append(cvcf(d))
        assert np.all(np.diff(irs) > 0)
        assert np.all(np.diff(necds) < 0)
        assert np.all(np.diff(cvcfs) > 0)

    def test_inverse_correlation_with_ir_and_cvcf(self):
        """Entropy-based balance moves opposite to the ratio/variation metrics
        across a ladder of power-law class profiles."""
        rows = []
        for i, gamma in enumerate(np.linspace(0.0, 3.0, 31)):
            k = (5, 8, 10, 12)[i % 4]
            d = dist_of(power_law_counts(5000, k, float(gamma)))
            rows.append((necd(d), imbalance_ratio(d), cvcf(d)))
        necd_v, ir_v, cvcf_v = map(np.array, zip(*rows))
        assert stats.spearmanr(necd_v, ir_v).statistic <= -0.8
        assert stats.spearmanr(necd_v, cvcf_v).statistic <= -0.8


class TestImbalanceReport:
    def test_fields_match_single_metrics(self):
        d = dist_of([500, 50, 5])
        r = imbalance_report(d)
        assert r.cvcf == cvcf(d)
        assert r.imbalance_ratio == imbalance_ratio(d)
        assert r.necd == necd(d)

    def test_zero_count_gives_nan_ratio(self):
        r = imbalance_report(LabelDistribution(counts=np.array([10, 0])))
        assert np.isnan(r.imbalance_ratio)
        assert r.necd == 0.0


class TestLabelDistributionValidation:
    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            LabelDistribution(counts=np.array([5, -1]))

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            LabelDistribution(counts=np.array([5]))

    def test_counts_are_write_protected(self):
        d = LabelDistribution(counts=np.array([5, 5]))
        with pytest.raises(ValueError):
            d.counts[0] = 1
