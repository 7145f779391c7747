"""Random-search HPO: search spaces, CV folds, pruning, and the optimizer."""

import numpy as np
import pytest

from imbench import (
    ForestParams,
    GbtParams,
    HpoSpec,
    ResNetConfig,
    TreeParams,
    TrialRecord,
    fit_family,
    hidden_dim_bounds,
    hpo_random_search,
    sample_params,
    stratified_kfold,
)
from tests.conftest import make_blobs


def parity_dataset(copies=25):
    bits = np.array(
        [[b0, b1, b2] for b0 in (0, 1) for b1 in (0, 1) for b2 in (0, 1)], dtype=float
    )
    x = np.tile(bits, (copies, 1))
    y = np.tile(bits.sum(axis=1).astype(int) % 2, copies)
    return x, y


class TestSampleParams:
    def draws(self, family, n=300, n_features=10):
        rng = np.random.default_rng(0)
        return [sample_params(family, rng, n_features) for _ in range(n)]

    def test_dt_space(self):
        for p in self.draws("dt"):
            assert set(p) == {"max_depth", "min_samples_split", "min_samples_leaf", "criterion"}
            assert 2 <= p["max_depth"] <= 32
            assert 2 <= p["min_samples_split"] <= 50
            assert 1 <= p["min_samples_leaf"] <= 20
            assert p["criterion"] in ("gini", "entropy")
            TreeParams(**p)

    def test_rf_space(self):
        fractions = set()
        for p in self.draws("rf"):
            assert 100 <= p["n_estimators"] <= 1000
            assert 3 <= p["max_depth"] <= 25
            if isinstance(p["max_features"], str):
                assert p["max_features"] in ("sqrt", "log2")
            else:
                fractions.add(p["max_features"])
            ForestParams(**p)
        assert fractions <= {0.3, 0.5, 0.7, 1.0}
        assert len(fractions) >= 3

    def test_gbt_space(self):
        for p in self.draws("gbt"):
            assert 200 <= p["n_estimators"] <= 1200
            assert 0.01 <= p["learning_rate"] <= 0.3
            assert 3 <= p["max_depth"] <= 12
            assert 0.6 <= p["subsample"] <= 1.0
            assert 0.5 <= p["colsample"] <= 1.0
            assert 0.0 <= p["reg_alpha"] <= 5.0
            assert 0.0 <= p["reg_lambda"] <= 5.0
            GbtParams(**p)

    def test_tabresnet_space(self):
        lo, hi = hidden_dim_bounds(10)
        for p in self.draws("tabresnet"):
            assert 1e-6 <= p["learning_rate"] <= 1e-1
            assert 1e-7 <= p["weight_decay"] <= 1e-2
            assert 32 <= p["batch_size"] <= 1024
            assert 1 <= p["n_blocks"] <= 4
            assert lo <= p["hidden_dim"] <= hi
            assert isinstance(p["use_reduction"], bool)
            assert "dropout" not in p
            ResNetConfig(n_features=10, n_classes=3, **p)

    def test_learning_rate_is_log_uniform(self):
        lrs = [p["learning_rate"] for p in self.draws("tabresnet", n=2000)]
        # a uniform draw over [1e-6, 1e-1] would have median near 0.05
        assert np.median(lrs) < 0.01

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError, match="family"):
            sample_params("svm", np.random.default_rng(0), 10)


class TestStratifiedKfold:
    def test_folds_partition_all_indices(self, rng):
        y = rng.integers(0, 4, size=203)
        folds = stratified_kfold(y, 5, seed=0)
        combined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(combined, np.arange(203))

    def test_per_class_fold_counts_within_one(self, rng):
        y = np.repeat([0, 1, 2], [61, 37, 13])
        folds = stratified_kfold(y, 4, seed=1)
        for k in range(3):
            per_fold = [np.sum(y[f] == k) for f in folds]
            assert max(per_fold) - min(per_fold) <= 1

    def test_deterministic_per_seed(self, rng):
        y = rng.integers(0, 3, size=90)
        a = stratified_kfold(y, 3, seed=5)
        b = stratified_kfold(y, 3, seed=5)
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa, fb)
        c = stratified_kfold(y, 3, seed=6)
        assert any(not np.array_equal(fa, fc) for fa, fc in zip(a, c))

    def test_class_smaller_than_fold_count_rejected(self):
        y = np.array([0] * 20 + [1] * 3)
        with pytest.raises(ValueError, match="folds"):
            stratified_kfold(y, 5, seed=0)


class TestFitFamily:
    def test_dispatch_covers_all_families(self):
        data = make_blobs(120, 2, 4, 3.0, seed=0)
        x, y = data.features, data.labels
        w = np.ones(2)
        cases = {
            "dt": {"max_depth": 4},
            "rf": {"n_estimators": 3, "max_depth": 4},
            "gbt": {"n_estimators": 2, "learning_rate": 0.3},
            "tabresnet": {"hidden_dim": 8, "n_blocks": 1, "max_epochs": 2, "batch_size": 32},
        }
        for family, params in cases.items():
            model = fit_family(family, x, y, w, params, 2, seed=0, x_val=x, y_val=y)
            assert model.family == family
            assert model.predict(x).shape == (120,)

    def test_tabresnet_requires_validation_split(self):
        data = make_blobs(60, 2, 4, 3.0, seed=0)
        with pytest.raises(ValueError, match="validation"):
            fit_family(
                "tabresnet", data.features, data.labels, np.ones(2),
                {"hidden_dim": 8, "max_epochs": 2}, 2, seed=0,
            )

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError, match="family"):
            fit_family("knn", np.ones((4, 2)), np.array([0, 1, 0, 1]), np.ones(2), {}, 2, 0)


class TestTrialRecord:
    def test_mean_of_fold_scores(self):
        r = TrialRecord(index=0, params={}, fold_scores=[0.5, 0.7], status="completed")
        assert r.mean_score == 0.6

    def test_empty_scores_mean_is_minus_inf(self):
        r = TrialRecord(index=0, params={}, fold_scores=[], status="pruned")
        assert r.mean_score == float("-inf")


class TestHpoSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            HpoSpec(n_trials=0)
        with pytest.raises(ValueError):
            HpoSpec(cv_folds=1)


class TestRandomSearch:
    def test_single_trial_wins_by_default(self):
        x, y = parity_dataset(copies=10)
        res = hpo_random_search("dt", x, y, spec=HpoSpec(n_trials=1, cv_folds=3, seed=0))
        assert res.best_trial == 0
        assert res.best_params == res.trials[0].params
        assert res.trials[0].status == "completed"

    def test_first_trial_is_never_pruned(self):
        for seed in range(5):
            x, y = parity_dataset(copies=8)
            res = hpo_random_search("dt", x, y, spec=HpoSpec(n_trials=3, cv_folds=3, seed=seed))
            assert res.trials[0].status == "completed"

    def test_best_fields_are_consistent(self):
        x, y = parity_dataset(copies=12)
        res = hpo_random_search("dt", x, y, spec=HpoSpec(n_trials=10, cv_folds=4, seed=3))
        completed = [t for t in res.trials if t.status == "completed"]
        assert res.best_score == max(t.mean_score for t in completed)
        assert res.trials[res.best_trial].params == res.best_params
        assert res.trials[res.best_trial].mean_score == res.best_score

    def test_pruned_trials_stop_early_and_record_partial_scores(self):
        x, y = parity_dataset(copies=12)
        res = hpo_random_search("dt", x, y, spec=HpoSpec(n_trials=25, cv_folds=5, seed=0))
        pruned = [t for t in res.trials if t.status == "pruned"]
        assert pruned, "expected the median rule to prune at least one shallow trial"
        for t in pruned:
            assert 1 <= len(t.fold_scores) < 5
        for t in res.trials:
            if t.status == "completed":
                assert len(t.fold_scores) == 5

    def test_overrides_pin_sampled_fields(self):
        x, y = parity_dataset(copies=8)
        spec = HpoSpec(n_trials=4, cv_folds=3, seed=1, overrides={"max_depth": 3})
        res = hpo_random_search("dt", x, y, spec=spec)
        assert all(t.params["max_depth"] == 3 for t in res.trials)

    def test_search_is_deterministic(self):
        data = make_blobs(150, 3, 4, 2.0, seed=2)
        spec = HpoSpec(n_trials=5, cv_folds=3, seed=9)
        a = hpo_random_search("dt", data.features, data.labels, spec=spec)
        b = hpo_random_search("dt", data.features, data.labels, spec=spec)
        assert a.best_params == b.best_params and a.best_score == b.best_score
        assert [t.status for t in a.trials] == [t.status for t in b.trials]

    def test_scores_are_valid_f1_values(self):
        data = make_blobs(150, 3, 4, 2.0, seed=2)
        res = hpo_random_search(
            "dt", data.features, data.labels, spec=HpoSpec(n_trials=5, cv_folds=3, seed=9)
        )
        for t in res.trials:
            assert all(0.0 <= s <= 1.0 for s in t.fold_scores)

    def test_weighting_strategy_is_accepted(self):
        data = make_blobs(200, 2, 4, 2.0, seed=4, counts=[170, 30])
        res = hpo_random_search(
            "dt", data.features, data.labels,
            spec=HpoSpec(n_trials=3, cv_folds=3, seed=0), strategy="inverse",
        )
        assert res.best_score > 0.0

    def test_search_finds_the_planted_parity_optimum(self):
        """Depth <= 2 trees cannot express 3-bit parity; the search should
        land on depth >= 3 in nearly every repetition."""
        x, y = parity_dataset()
        wins = 0
        for rep in range(20):
            res = hpo_random_search("dt", x, y, spec=HpoSpec(n_trials=25, cv_folds=5, seed=rep))
            if res.best_params["max_depth"] >= 3:
                wins += 1
        assert wins >= 18
