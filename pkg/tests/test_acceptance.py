"""Release gate: one test per acceptance criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
PASS/FAIL lines and timings.  Every check here is an end-to-end restatement
of behaviour that the module tests cover piecewise; tolerances and runtime
budgets are part of the contract.
"""

import contextlib
import math
import time
import xml.etree.ElementTree as ET

import numpy as np
from scipy import stats

from imbench import (
    ExperimentConfig,
    LabelDistribution,
    ResNetConfig,
    SynthConfig,
    accuracy,
    alias_family,
    block_matrix,
    class_frequencies,
    compute_weights,
    confusion_matrix,
    counts_for_ratio,
    cvcf,
    f1_scores,
    fit_family,
    friedman,
    gradient_check,
    holm_adjust,
    imbalance_ratio,
    imbalance_report,
    necd,
    power_law_counts,
    rank_analysis,
    render_cd,
    run_sweep,
    stratified_split,
    synth_generate,
    unregister_family,
    weighted_bce,
    weighted_cce,
    wilcoxon_signed_rank,
)
from imbench.losses import bce_from_logits, cce_from_logits


@contextlib.contextmanager
def criterion(number, limit):
    """Time a criterion body and print a single verdict line."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print("criterion %d: FAIL (%.1fs)" % (number, time.perf_counter() - start))
        raise
    elapsed = time.perf_counter() - start
    print("criterion %d: %s (%.1fs, budget %ds)" % (
        number, "PASS" if elapsed < limit else "FAIL", elapsed, limit))
    assert elapsed < limit, "runtime %.1fs exceeded the %ds budget" % (elapsed, limit)


def dist(counts):
    return class_frequencies(np.repeat(np.arange(len(counts)), counts))


def balanced_blobs(counts, n_features, separation, seed):
    cfg = SynthConfig(
        n_samples=int(np.sum(counts)), n_classes=len(counts), n_features=n_features,
        cluster_separation=separation, class_counts=tuple(int(c) for c in counts),
        seed=seed,
    )
    return synth_generate(cfg)


def test_criterion_1_closed_form_metric_suite():
    """Frozen worked examples for every closed-form quantity."""
    with criterion(1, limit=5.0):
        # imbalance metrics
        assert cvcf(dist([2, 2])) == 0.0
        np.testing.assert_allclose(cvcf(dist([75, 25])), 0.5, rtol=1e-12)
        np.testing.assert_allclose(cvcf(dist([900, 90, 10])), 1.2061, atol=1e-4)
        assert imbalance_ratio(dist([50, 50])) == 1.0
        np.testing.assert_allclose(imbalance_ratio(dist([900, 90, 10])), 90.0, rtol=1e-12)
        np.testing.assert_allclose(necd(dist([10, 10, 10])), 1.0, rtol=1e-12)
        assert necd(LabelDistribution(counts=np.array([100, 0]))) == 0.0
        np.testing.assert_allclose(necd(dist([990, 10])), 0.0808, atol=1e-4)

        # weighting schemes
        w = compute_weights(dist([90, 10]), "inverse").weights
        np.testing.assert_allclose(w, [0.5556, 5.0], atol=1e-4)
        w = compute_weights(dist([9000, 1000]), "effective", beta=0.9999).weights
        np.testing.assert_allclose(w, [0.580, 3.618], atol=1e-3)
        w = compute_weights(dist([500, 300, 200]), "median").weights
        np.testing.assert_allclose(w, [0.6, 1.0, 1.5], rtol=1e-12)
        w = compute_weights(dist([70, 30]), "median").weights
        np.testing.assert_allclose(w, [0.7143, 1.6667], atol=1e-4)

        # weighted losses
        loss, _ = weighted_bce(np.array([1]), np.array([0.5]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(loss, math.log(2.0), rtol=1e-12)
        loss, _ = weighted_bce(np.array([1, 0]), np.array([0.9, 0.2]), np.array([1.0, 2.0]))
        np.testing.assert_allclose(loss, 0.21693, atol=1e-5)
        probs = np.array([[0.5, 0.3, 0.2], [0.4, 0.25, 0.35]])
        loss, _ = weighted_cce(np.array([0, 1]), probs, np.array([2.0, 0.5, 1.0]))
        np.testing.assert_allclose(loss, 1.03972, atol=1e-5)

        # evaluation
        cm = confusion_matrix([0, 0, 0, 1], [0, 0, 1, 1])
        np.testing.assert_allclose(accuracy(cm), 0.75, rtol=1e-12)
        s = f1_scores(cm)
        np.testing.assert_allclose(s.per_class, [0.8, 0.6667], atol=1e-4)
        np.testing.assert_allclose(s.macro, 0.7333, atol=1e-4)
        np.testing.assert_allclose(s.weighted, 0.7667, atol=1e-4)


def test_criterion_2_entropy_vs_skew_inverse_correlation():
    """Across a ladder of power-law label profiles the entropy-based metric
    moves opposite to both ratio- and dispersion-based metrics."""
    with criterion(2, limit=60.0):
        gammas = np.linspace(0.0, 3.0, 31)
        class_cycle = (5, 8, 10, 12)
        rows = []
        for i, gamma in enumerate(gammas):
            counts = power_law_counts(5000, class_cycle[i % 4], float(gamma))
            report = imbalance_report(LabelDistribution(counts=np.asarray(counts)))
            rows.append((report.necd, report.imbalance_ratio, report.cvcf))
        necds, irs, cvcfs = (np.array(col) for col in zip(*rows))
        rho_ir = stats.spearmanr(necds, irs).statistic
        rho_cv = stats.spearmanr(necds, cvcfs).statistic
        assert rho_ir <= -0.8, "spearman(necd, ir) = %.4f" % rho_ir
        assert rho_cv <= -0.8, "spearman(necd, cvcf) = %.4f" % rho_cv


_DEGRADATION_PARAMS = {
    "dt": {"max_depth": 10},
    "rf": {"n_estimators": 24, "max_depth": 8},
    "gbt": {"n_estimators": 20, "learning_rate": 0.25, "max_depth": 3, "subsample": 0.5},
    "tabresnet": {"hidden_dim": 16, "n_blocks": 1, "batch_size": 256, "max_epochs": 15},
}


def test_criterion_3_degradation_with_imbalance():
    """Weighted F1 on a fixed balanced probe set declines as the training
    pool's imbalance ratio is dialled from 1 to 100 (at most one adjacent
    inversion of at most 0.02 per family)."""
    with criterion(3, limit=900.0):
        ratios = (1, 3, 10, 30, 100)
        probe_per_class = 250
        seeds = range(5)
        curves = {family: [] for family in _DEGRADATION_PARAMS}
        for ratio in ratios:
            counts = counts_for_ratio(10000, 10, ratio)
            per_seed = {family: [] for family in _DEGRADATION_PARAMS}
            for s in seeds:
                gen_counts = [c + probe_per_class for c in counts]
                data = balanced_blobs(gen_counts, n_features=12, separation=1.6,
                                      seed=97 + 13 * s + ratio)
                # rows come out grouped by class: carve a balanced probe set
                # off the tail of each class block, pool the rest
                pool_idx, probe_idx = [], []
                offset = 0
                for k, gc in enumerate(gen_counts):
                    pool_idx.append(np.arange(offset, offset + counts[k]))
                    probe_idx.append(np.arange(offset + counts[k], offset + gc))
                    offset += gc
                pool = data.subset(np.concatenate(pool_idx))
                probe = data.subset(np.concatenate(probe_idx))
                split = stratified_split(pool, fractions=(0.8, 0.15, 0.05), seed=s)
                train, val = pool.subset(split.train), pool.subset(split.val)
                weights = compute_weights(class_frequencies(train.labels), "effective")
                for family, params in _DEGRADATION_PARAMS.items():
                    model = fit_family(family, train.features, train.labels, weights,
                                       params, 10, s, x_val=val.features, y_val=val.labels)
                    cm = confusion_matrix(probe.labels, model.predict(probe.features),
                                          n_classes=10)
                    per_seed[family].append(f1_scores(cm).weighted)
            for family in curves:
                curves[family].append(float(np.mean(per_seed[family])))
        for family, curve in curves.items():
            inversions = [d for d in np.diff(curve) if d > 1e-12]
            assert len(inversions) <= 1 and all(d <= 0.02 for d in inversions), (
                "%s: weighted F1 not monotone within tolerance: %s" % (family, curve))


def test_criterion_4_gradient_correctness():
    """Analytic gradients of the weighted losses and of the full network match
    central finite differences to better than 1e-4 relative error."""
    with criterion(4, limit=30.0):
        rng = np.random.default_rng(0)
        worst = 0.0
        h = 1e-6
        for _ in range(5):  # binary loss on logits
            n = int(rng.integers(2, 8))
            y = rng.integers(0, 2, size=n)
            z = rng.normal(scale=2.0, size=n)
            wv = rng.uniform(0.5, 2.0, size=2)
            _, grad = bce_from_logits(y, z, wv)
            for j in range(n):
                zp, zm = z.copy(), z.copy()
                zp[j] += h
                zm[j] -= h
                numeric = (bce_from_logits(y, zp, wv)[0] - bce_from_logits(y, zm, wv)[0]) / (2 * h)
                worst = max(worst, abs(numeric - grad[j]) / max(abs(grad[j]), 1e-8))
        for _ in range(5):  # multiclass loss on logits
            n, k = int(rng.integers(2, 6)), int(rng.integers(3, 6))
            y = rng.integers(0, k, size=n)
            z = rng.normal(scale=2.0, size=(n, k))
            wv = rng.uniform(0.5, 2.0, size=k)
            _, grad = cce_from_logits(y, z, wv)
            for idx in np.ndindex(z.shape):
                zp, zm = z.copy(), z.copy()
                zp[idx] += h
                zm[idx] -= h
                numeric = (cce_from_logits(y, zp, wv)[0] - cce_from_logits(y, zm, wv)[0]) / (2 * h)
                worst = max(worst, abs(numeric - grad[idx]) / max(abs(grad[idx]), 1e-8))
        assert worst < 1e-4, "loss gradient error %.3e" % worst

        configs = [
            dict(n_features=4, n_classes=3, hidden_dim=8, n_blocks=1),
            dict(n_features=4, n_classes=3, hidden_dim=8, n_blocks=2),
            dict(n_features=6, n_classes=2, hidden_dim=8, n_blocks=1, binary_mode=True),
            dict(n_features=6, n_classes=2, hidden_dim=8, n_blocks=1),
            dict(n_features=3, n_classes=4, hidden_dim=8, n_blocks=1, use_reduction=True),
            dict(n_features=5, n_classes=2, hidden_dim=10, n_blocks=2, binary_mode=True),
            dict(n_features=5, n_classes=5, hidden_dim=8, n_blocks=1),
            dict(n_features=8, n_classes=3, hidden_dim=8, n_blocks=1, use_reduction=True),
            dict(n_features=2, n_classes=2, hidden_dim=8, n_blocks=3),
            dict(n_features=7, n_classes=2, hidden_dim=12, n_blocks=1),
        ]
        net_worst = max(
            gradient_check(ResNetConfig(dropout=0.0, seed=i, **kw), n_samples=6, seed=i)
            for i, kw in enumerate(configs)
        )
        assert net_worst < 1e-4, "network gradient error %.3e" % net_worst


def wilcoxon_enumeration_oracle(diff):
    diff = np.asarray(diff, dtype=float)
    diff = diff[diff != 0]
    n = diff.size
    ranks = stats.rankdata(np.abs(diff))
    w = min(ranks[diff > 0].sum(), ranks[diff < 0].sum())
    total = ranks.sum()
    hits = 0
    for mask in range(2**n):
        w_plus = sum(ranks[i] for i in range(n) if (mask >> i) & 1)
        if w_plus <= w + 1e-9 or w_plus >= total - w - 1e-9:
            hits += 1
    return hits / 2.0**n


def test_criterion_5_statistics_oracles():
    """Exact Wilcoxon equals full enumeration; Friedman and Holm reproduce
    their planted worked examples."""
    with criterion(5, limit=10.0):
        rng = np.random.default_rng(5)
        for n in range(3, 11):
            for _ in range(2):
                diff = rng.normal(size=n)
                _, p = wilcoxon_signed_rank(diff, np.zeros(n))
                assert p == wilcoxon_enumeration_oracle(diff), "n=%d mismatch" % n

        values = np.array([[30, 20, 10], [3, 2, 1], [300, 200, 100], [0.3, 0.2, 0.1]])
        from imbench import BlockMatrix

        matrix = BlockMatrix(values=values, treatments=("A", "B", "C"),
                             blocks=("b0", "b1", "b2", "b3"))
        statistic, df, p = friedman(matrix)
        np.testing.assert_allclose(statistic, 8.0, rtol=1e-12)
        assert df == 2
        np.testing.assert_allclose(p, 0.0183, atol=1e-3)

        np.testing.assert_allclose(
            holm_adjust([0.01, 0.04, 0.03]), [0.03, 0.06, 0.06], rtol=1e-12)


def test_criterion_6_weight_duplication_equivalence():
    """An integer class weight of two is indistinguishable from physically
    duplicating the minority rows, probed on 100 fresh points."""
    with criterion(6, limit=10.0):
        data = balanced_blobs([80, 40], n_features=2, separation=2.0, seed=21)
        weighted = fit_family("dt", data.features, data.labels,
                              np.array([1.0, 2.0]), {"max_depth": 6}, 2, 0)
        dup_idx = np.concatenate([np.arange(data.n_samples),
                                  np.flatnonzero(data.labels == 1)])
        duplicated = fit_family("dt", data.features[dup_idx], data.labels[dup_idx],
                                np.array([1.0, 1.0]), {"max_depth": 6}, 2, 0)
        grid_rng = np.random.default_rng(77)
        lo, hi = data.features.min(axis=0), data.features.max(axis=0)
        grid = grid_rng.uniform(lo, hi, size=(100, 2))
        np.testing.assert_array_equal(weighted.predict(grid), duplicated.predict(grid))
        np.testing.assert_array_equal(weighted.predict_proba(grid),
                                      duplicated.predict_proba(grid))


_MINORITY_PARAMS = {
    "dt": {"max_depth": 8},
    "rf": {"n_estimators": 24, "max_depth": 8},
    "gbt": {"n_estimators": 20, "learning_rate": 0.25},
    "tabresnet": {"hidden_dim": 16, "n_blocks": 1, "max_epochs": 20, "batch_size": 128},
}


def test_criterion_7_minority_recall_never_hurt_by_effective_weights():
    """On a 50:1 binary task, effective-number weighting gives every family at
    least the unweighted baseline's minority recall (mean over 5 seeds)."""
    with criterion(7, limit=300.0):
        counts = counts_for_ratio(4000, 2, 50)
        recalls = {f: {"none": [], "effective": []} for f in _MINORITY_PARAMS}
        for s in range(5):
            data = balanced_blobs(counts, n_features=8, separation=1.4, seed=100 + s)
            split = stratified_split(data, seed=s)
            train, val, test = (data.subset(split.train), data.subset(split.val),
                                data.subset(split.test))
            freq = class_frequencies(train.labels)
            for family, params in _MINORITY_PARAMS.items():
                for strategy in ("none", "effective"):
                    weights = compute_weights(freq, strategy)
                    model = fit_family(family, train.features, train.labels, weights,
                                       params, 2, s, x_val=val.features, y_val=val.labels)
                    cm = confusion_matrix(test.labels, model.predict(test.features),
                                          n_classes=2)
                    recalls[family][strategy].append(cm[1, 1] / cm[1].sum())
        for family, by_strategy in recalls.items():
            base = float(np.mean(by_strategy["none"]))
            weighted = float(np.mean(by_strategy["effective"]))
            assert weighted >= base, (
                "%s: effective %.4f < unweighted %.4f" % (family, weighted, base))


_TIMING_PARAMS = {
    "dt": {"max_depth": 8},
    "rf": {"n_estimators": 16, "max_depth": 8},
    "gbt": {"n_estimators": 15, "learning_rate": 0.25},
    "tabresnet": {"hidden_dim": 32, "n_blocks": 2, "batch_size": 256,
                  "max_epochs": 12, "patience": 20},
}


def test_criterion_8_training_time_scales_with_n():
    """Median fit seconds are non-decreasing in dataset size (10% jitter
    allowance), and the network costs more than a single tree at 25k rows."""
    with criterion(8, limit=1200.0):
        sizes = (1000, 5000, 25000)
        medians = {family: [] for family in _TIMING_PARAMS}
        for i, n in enumerate(sizes):
            cfg = SynthConfig(n_samples=n, n_classes=5, n_features=10,
                              cluster_separation=2.0, power_law_exponent=1.0,
                              seed=50 + i)
            data = synth_generate(cfg)
            split = stratified_split(data, fractions=(0.8, 0.1, 0.1), seed=0)
            train, val = data.subset(split.train), data.subset(split.val)
            weights = compute_weights(class_frequencies(train.labels), "none")
            for family, params in _TIMING_PARAMS.items():
                reps = []
                for rep in range(3):
                    model = fit_family(family, train.features, train.labels, weights,
                                       params, 5, rep, x_val=val.features,
                                       y_val=val.labels)
                    reps.append(model.train_seconds)
                medians[family].append(float(np.median(reps)))
        for family, curve in medians.items():
            for smaller, larger in zip(curve, curve[1:]):
                assert larger >= 0.9 * smaller, "%s: %s" % (family, curve)
        assert medians["tabresnet"][-1] > medians["dt"][-1], (
            "tabresnet %.3fs vs dt %.3fs at n=25k" % (
                medians["tabresnet"][-1], medians["dt"][-1]))


def test_criterion_9_end_to_end_sweep_and_rank_pipeline():
    """A 16-classifier x 12-block sweep yields a complete result table, a
    15-degree-of-freedom Friedman test, a Holm-adjusted pairwise table, and a
    CD diagram in which two deliberately aliased variants share a clique."""
    with criterion(9, limit=1800.0):
        counts = power_law_counts(4000, 12, 1.6)
        thresholds = tuple(
            int(t) for t in sorted({1, 2} | {int(c) + 1 for c in sorted(counts)[:10]})
        )[:12]
        assert thresholds == (1, 2, 40, 46, 53, 63, 76, 94, 119, 160, 228, 360)
        dt_params = {"max_depth": 8}
        alias_family("dt2", "dt")
        try:
            config = ExperimentConfig(
                synth=SynthConfig(n_samples=4000, n_classes=12, n_features=8,
                                  cluster_separation=1.5, power_law_exponent=1.6,
                                  seed=7),
                filter_thresholds=thresholds,
                strategies=("none", "inverse", "effective", "median"),
                families=("dt", "dt2", "rf", "gbt"),
                n_runs=1,
                base_seed=11,
                model_params={
                    "dt": dt_params,
                    "dt2": dict(dt_params),
                    "rf": {"n_estimators": 8, "max_depth": 8},
                    "gbt": {"n_estimators": 8, "learning_rate": 0.3, "max_depth": 3},
                },
            )
            results, summaries = run_sweep(config)
        finally:
            unregister_family("dt2")

        assert len(results) == 12 * 16
        assert all(r.status == "ok" for r in results)
        matrix = block_matrix(summaries, metric="weighted_f1")
        assert matrix.values.shape == (12, 16)
        analysis = rank_analysis(matrix)
        assert analysis.friedman_df == 15
        assert 0.0 < analysis.friedman_p < 1e-6
        assert len(analysis.pairwise) == 16 * 15 // 2
        assert all(p.p_adjusted >= p.p_raw for p in analysis.pairwise)

        svg = render_cd(analysis)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")

        for strategy in ("none", "inverse", "effective", "median"):
            a, b = "dt+%s" % strategy, "dt2+%s" % strategy
            col_a = matrix.values[:, matrix.treatments.index(a)]
            col_b = matrix.values[:, matrix.treatments.index(b)]
            np.testing.assert_array_equal(col_a, col_b)
            assert any(a in clique and b in clique for clique in analysis.cliques), (
                "aliased pair %s/%s not in a shared clique" % (a, b))
