"""Benchmark harness: run (threshold x strategy x family x seed) blocks,
summarize, persist, and pivot results for rank analysis.

A *block* is one (target, filter-threshold) slice of a dataset; a
*classifier* is a model family paired with a weighting strategy.  Each run
filters rare classes, splits 60/20/20 stratified, computes class weights on
the training split only, fits with the fit wall-clock timed, and evaluates
accuracy plus macro and weighted F1 on the test split.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import Dataset, filter_min_class_count, load_csv, load_schema, preprocess, stratified_split
from .evaluation import accuracy, confusion_matrix, f1_scores
from .hpo import HpoSpec, fit_family, hpo_random_search
from .imbalance import class_frequencies, imbalance_report
from .ranking import BlockMatrix
from .synth import SynthConfig, synth_generate
from .weighting import STRATEGIES, compute_weights

__all__ = [
    "FamilySpec",
    "register_family",
    "alias_family",
    "unregister_family",
    "registered_families",
    "get_family",
    "ExperimentConfig",
    "BlockResult",
    "SummaryRow",
    "classifier_id",
    "run_block",
    "run_sweep",
    "summarize",
    "write_results",
    "read_results",
    "write_results_json",
    "write_summary",
    "write_degradation",
    "block_matrix",
    "load_experiment_config",
    "load_dataset",
]

_FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# classifier registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    """A registered model family: a fit callable plus default params.

    ``fit(x, y, weights, params, n_classes, seed, x_val, y_val)`` must
    return an object with ``predict(x)``.
    """

    name: str
    fit: object
    default_params: dict


def _builtin_fit(family: str):
    def fit(x, y, weights, params, n_classes, seed, x_val=None, y_val=None):
        return fit_family(family, x, y, weights, params, n_classes, seed, x_val=x_val, y_val=y_val)

    return fit


_REGISTRY: dict = {}


def register_family(name: str, fit, default_params: dict | None = None) -> None:
    """Add (or replace) a model family; external additions welcome."""
    _REGISTRY[name] = FamilySpec(name=name, fit=fit, default_params=dict(default_params or {}))


def alias_family(new_name: str, existing: str) -> None:
    """Register ``new_name`` as an exact duplicate of an existing family."""
    spec = get_family(existing)
    _REGISTRY[new_name] = FamilySpec(name=new_name, fit=spec.fit, default_params=dict(spec.default_params))


def unregister_family(name: str) -> None:
    _REGISTRY.pop(name, None)


def registered_families() -> tuple:
    return tuple(sorted(_REGISTRY))


def get_family(name: str) -> FamilySpec:
    if name not in _REGISTRY:
        raise ValueError("unknown model family %r (registered: %s)" % (name, ", ".join(sorted(_REGISTRY))))
    return _REGISTRY[name]


register_family("dt", _builtin_fit("dt"), {"max_depth": 12})
register_family("rf", _builtin_fit("rf"), {"n_estimators": 100, "max_depth": 12})
register_family("gbt", _builtin_fit("gbt"), {"n_estimators": 200, "learning_rate": 0.1, "max_depth": 3})
register_family(
    "tabresnet",
    _builtin_fit("tabresnet"),
    {
        "hidden_dim": 32,
        "n_blocks": 2,
        "dropout": 0.1,
        "learning_rate": 1e-3,
        "weight_decay": 1e-4,
        "batch_size": 128,
        "max_epochs": 200,
    },
)


def classifier_id(family: str, strategy: str) -> str:
    return "%s+%s" % (family, strategy)


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    csv_path: str | None = None
    schema_path: str | None = None
    synth: SynthConfig | None = None
    target: str = "label"
    filter_thresholds: tuple | None = None   # None -> default_threshold_ladder
    strategies: tuple = STRATEGIES
    families: tuple = ("dt", "rf", "gbt", "tabresnet")
    n_runs: int = 10
    base_seed: int = 0
    fractions: tuple = (0.6, 0.2, 0.2)
    beta: float = 0.9999
    model_params: dict = field(default_factory=dict)
    hpo_enabled: bool = False
    hpo: HpoSpec = field(default_factory=HpoSpec)
    hpo_per_threshold: bool = False
    hpo_strategy: str = "none"
    workers: int = 1

    def __post_init__(self):
        has_csv = self.csv_path is not None
        if has_csv == (self.synth is not None):
            raise ValueError("configure exactly one dataset source (csv or synth)")
        if has_csv and self.schema_path is None:
            raise ValueError("csv datasets need a schema_path")
        if self.filter_thresholds is not None:
            thresholds = tuple(int(t) for t in self.filter_thresholds)
            if not thresholds or any(t < 1 for t in thresholds):
                raise ValueError("filter_thresholds must be >= 1")
            if list(thresholds) != sorted(thresholds):
                raise ValueError("filter_thresholds must be ascending")
            object.__setattr__(self, "filter_thresholds", thresholds)
        if not self.strategies or any(s not in STRATEGIES for s in self.strategies):
            raise ValueError("strategies must be drawn from %s" % (STRATEGIES,))
        if not self.families:
            raise ValueError("at least one model family required")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))


def load_experiment_config(path) -> ExperimentConfig:
    """Build an ExperimentConfig from its JSON file form (see README)."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    dataset = obj.get("dataset", {})
    synth = None
    csv_path = schema_path = None
    if "synth" in dataset:
        synth = SynthConfig(**{k: (tuple(v) if k == "class_counts" else v) for k, v in dataset["synth"].items()})
    else:
        csv_path = dataset.get("csv")
        schema_path = dataset.get("schema")
    hpo_obj = obj.get("hpo", {})
    spec = HpoSpec(
        n_trials=int(hpo_obj.get("n_trials", 25)),
        cv_folds=int(hpo_obj.get("cv_folds", 5)),
        seed=int(hpo_obj.get("seed", 42)),
        overrides=dict(hpo_obj.get("overrides", {})),
    )
    return ExperimentConfig(
        csv_path=csv_path,
        schema_path=schema_path,
        synth=synth,
        target=str(obj.get("target", "label")),
        filter_thresholds=(tuple(obj["filter_thresholds"]) if "filter_thresholds" in obj else None),
        strategies=tuple(obj.get("strategies", STRATEGIES)),
        families=tuple(obj.get("families", ("dt", "rf", "gbt", "tabresnet"))),
        n_runs=int(obj.get("n_runs", 10)),
        base_seed=int(obj.get("base_seed", 0)),
        fractions=tuple(obj.get("fractions", (0.6, 0.2, 0.2))),
        beta=float(obj.get("beta", 0.9999)),
        model_params=dict(obj.get("model_params", {})),
        hpo_enabled=bool(hpo_obj.get("enabled", False)),
        hpo=spec,
        hpo_per_threshold=bool(hpo_obj.get("per_threshold", False)),
        hpo_strategy=str(hpo_obj.get("strategy", "none")),
        workers=int(obj.get("workers", 1)),
    )


def default_threshold_ladder(counts) -> tuple:
    """Geometric 1-2-5 ladder of minimum class counts, capped so that at
    least two classes survive the harshest filter."""
    counts = np.sort(np.asarray(counts, dtype=np.int64))
    if counts.size < 2:
        raise ValueError("need at least two classes for a threshold ladder")
    cap = int(counts[-2])
    ladder, step = [], 1
    while step <= cap:
        ladder.append(step)
        for mult in (2, 5):
            if step * mult <= cap:
                ladder.append(step * mult)
        step *= 10
    return tuple(ladder) or (1,)


def load_dataset(config: ExperimentConfig) -> Dataset:
    if config.synth is not None:
        return synth_generate(config.synth)
    schema = load_schema(config.schema_path)
    return preprocess(load_csv(config.csv_path, schema))


# ---------------------------------------------------------------------------
# block execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockResult:
    classifier: str
    target: str
    filter_threshold: int
    seed: int
    status: str = "ok"          # "ok" | "skipped"
    reason: str = ""
    cvcf: float = float("nan")
    imbalance_ratio: float = float("nan")
    necd: float = float("nan")
    accuracy: float = float("nan")
    macro_f1: float = float("nan")
    weighted_f1: float = float("nan")
    train_seconds: float = float("nan")
    n_train: int = 0


def run_block(
    data: Dataset,
    family: str,
    strategy: str,
    filter_threshold: int,
    seed: int,
    target: str = "label",
    fractions=(0.6, 0.2, 0.2),
    beta: float = 0.9999,
    params: dict | None = None,
) -> BlockResult:
    """One benchmark run; degenerate filtering or split preconditions turn
    into a skipped result rather than an exception."""
    cid = classifier_id(family, strategy)
    spec = get_family(family)
    merged = {**spec.default_params, **(params or {})}
    try:
        filtered = filter_min_class_count(data, filter_threshold)
        split = stratified_split(filtered, fractions=fractions, seed=seed)
    except ValueError as exc:
        return BlockResult(cid, target, filter_threshold, seed, status="skipped", reason=str(exc))

    train = filtered.subset(split.train)
    val = filtered.subset(split.val)
    test = filtered.subset(split.test)
    dist = class_frequencies(train.labels)
    if dist.n_classes != filtered.n_classes:
        return BlockResult(
            cid, target, filter_threshold, seed,
            status="skipped", reason="a class is missing from the training split",
        )
    report = imbalance_report(dist)
    weights = compute_weights(dist, strategy, beta=beta)

    t0 = time.perf_counter()
    model = spec.fit(
        train.features, train.labels, weights, merged, filtered.n_classes, seed,
        x_val=val.features, y_val=val.labels,
    )
    seconds = time.perf_counter() - t0

    pred = model.predict(test.features)
    cm = confusion_matrix(test.labels, pred, n_classes=filtered.n_classes)
    f1 = f1_scores(cm)
    return BlockResult(
        classifier=cid,
        target=target,
        filter_threshold=filter_threshold,
        seed=seed,
        cvcf=report.cvcf,
        imbalance_ratio=report.imbalance_ratio,
        necd=report.necd,
        accuracy=accuracy(cm),
        macro_f1=f1.macro,
        weighted_f1=f1.weighted,
        train_seconds=seconds,
        n_train=train.n_samples,
    )


def _run_block_task(args) -> BlockResult:
    data, family, strategy, threshold, seed, target, fractions, beta, params = args
    return run_block(
        data, family, strategy, threshold, seed,
        target=target, fractions=fractions, beta=beta, params=params,
    )


@dataclass(frozen=True)
class SummaryRow:
    classifier: str
    target: str
    filter_threshold: int
    n_runs: int
    n_skipped: int
    cvcf: float
    imbalance_ratio: float
    necd: float
    n_train: float
    accuracy_mean: float
    accuracy_std: float
    macro_f1_mean: float
    macro_f1_std: float
    weighted_f1_mean: float
    weighted_f1_std: float
    train_seconds_mean: float
    train_seconds_std: float


def _resolve_params(config: ExperimentConfig, data: Dataset) -> dict:
    """Per-(family, threshold) params: registry defaults, then config
    overrides, then HPO winners when enabled."""
    out = {}
    for family in config.families:
        base = {**get_family(family).default_params, **config.model_params.get(family, {})}
        for threshold in config.filter_thresholds:
            out[(family, threshold)] = dict(base)
    if not config.hpo_enabled:
        return out
    thresholds = config.filter_thresholds if config.hpo_per_threshold else config.filter_thresholds[:1]
    for family in config.families:
        for threshold in thresholds:
            filtered = filter_min_class_count(data, threshold)
            split = stratified_split(filtered, fractions=config.fractions, seed=config.base_seed)
            train = filtered.subset(split.train)
            result = hpo_random_search(
                family,
                train.features,
                train.labels,
                spec=config.hpo,
                strategy=config.hpo_strategy,
                beta=config.beta,
                n_classes=filtered.n_classes,
            )
            base = {**out[(family, threshold)], **result.best_params}
            targets = [threshold] if config.hpo_per_threshold else config.filter_thresholds
            for t in targets:
                out[(family, t)] = dict(base)
    return out


def run_sweep(config: ExperimentConfig, data: Dataset | None = None) -> tuple:
    """Cartesian product of thresholds x strategies x families x runs.

    Returns (results, summaries) with rows in deterministic sorted order.
    ``workers > 1`` fans blocks out to processes; use 1 for clean timing.
    """
    if data is None:
        data = load_dataset(config)
    if config.filter_thresholds is None:
        ladder = default_threshold_ladder(class_frequencies(data.labels).counts)
        config = replace(config, filter_thresholds=ladder)
    params = _resolve_params(config, data)
    tasks = []
    for threshold in config.filter_thresholds:
        for strategy in config.strategies:
            for family in config.families:
                for run in range(config.n_runs):
                    tasks.append(
                        (
                            data, family, strategy, threshold, config.base_seed + run,
                            config.target, config.fractions, config.beta,
                            params[(family, threshold)],
                        )
                    )
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_block_task, tasks, chunksize=1))
    else:
        results = [_run_block_task(t) for t in tasks]
    results.sort(key=lambda r: (r.target, r.filter_threshold, r.classifier, r.seed))
    return results, summarize(results)


def summarize(results) -> list:
    """Mean/std (population) per (classifier, target, threshold) over the
    ok runs; skipped runs are counted but excluded from the statistics."""
    groups: dict = {}
    for r in results:
        groups.setdefault((r.target, r.filter_threshold, r.classifier), []).append(r)
    rows = []
    for (target, threshold, cid), rs in sorted(groups.items()):
        ok = [r for r in rs if r.status == "ok"]
        n_skipped = len(rs) - len(ok)
        if not ok:
            continue

        def stat(name):
            vals = np.array([getattr(r, name) for r in ok])
            return float(vals.mean()), float(vals.std())

        acc = stat("accuracy")
        mf1 = stat("macro_f1")
        wf1 = stat("weighted_f1")
        sec = stat("train_seconds")
        rows.append(
            SummaryRow(
                classifier=cid,
                target=target,
                filter_threshold=threshold,
                n_runs=len(ok),
                n_skipped=n_skipped,
                cvcf=float(np.mean([r.cvcf for r in ok])),
                imbalance_ratio=float(np.mean([r.imbalance_ratio for r in ok])),
                necd=float(np.mean([r.necd for r in ok])),
                n_train=float(np.mean([r.n_train for r in ok])),
                accuracy_mean=acc[0],
                accuracy_std=acc[1],
                macro_f1_mean=mf1[0],
                macro_f1_std=mf1[1],
                weighted_f1_mean=wf1[0],
                weighted_f1_std=wf1[1],
                train_seconds_mean=sec[0],
                train_seconds_std=sec[1],
            )
        )
    return rows


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

_RESULT_FIELDS = (
    "classifier", "target", "filter_threshold", "seed", "status", "reason",
    "cvcf", "imbalance_ratio", "necd", "accuracy", "macro_f1", "weighted_f1",
    "train_seconds", "n_train",
)
_FLOAT_FIELDS = ("cvcf", "imbalance_ratio", "necd", "accuracy", "macro_f1", "weighted_f1", "train_seconds")


def _format_cell(value) -> str:
    if isinstance(value, float):
        return _FLOAT_FMT % value
    return str(value)


def write_results(results, path) -> None:
    """Raw per-run rows as CSV; floats carry 17 significant digits so the
    read side reproduces them bit-for-bit."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RESULT_FIELDS)
        for r in results:
            writer.writerow([_format_cell(getattr(r, f)) for f in _RESULT_FIELDS])


def read_results(path) -> list:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != _RESULT_FIELDS:
            raise ValueError("unexpected results header in %s" % path)
        rows = []
        for row in reader:
            rec = dict(zip(_RESULT_FIELDS, row))
            rows.append(
                BlockResult(
                    classifier=rec["classifier"],
                    target=rec["target"],
                    filter_threshold=int(rec["filter_threshold"]),
                    seed=int(rec["seed"]),
                    status=rec["status"],
                    reason=rec["reason"],
                    n_train=int(rec["n_train"]),
                    **{f: float(rec[f]) for f in _FLOAT_FIELDS},
                )
            )
    return rows


def write_results_json(results, path) -> None:
    """JSON mirror of the results CSV (list of row objects)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([asdict(r) for r in results], fh, indent=1)


def write_summary(rows, path) -> None:
    fields = [f for f in SummaryRow.__dataclass_fields__]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for r in rows:
            writer.writerow([_format_cell(getattr(r, f)) for f in fields])


def write_degradation(rows, path, metric: str = "weighted_f1") -> None:
    """Degradation-curve table: the chosen metric against each imbalance
    measure, one row per (classifier, block)."""
    mean_field = metric + "_mean"
    std_field = metric + "_std"
    if mean_field not in SummaryRow.__dataclass_fields__:
        raise ValueError("unknown metric %r" % metric)
    header = ["classifier", "target", "filter_threshold", "cvcf", "imbalance_ratio", "necd",
              "n_train", mean_field, std_field]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in sorted(rows, key=lambda r: (r.classifier, r.target, r.filter_threshold)):
            writer.writerow([_format_cell(getattr(r, f)) for f in header])


def block_matrix(summaries, metric: str = "weighted_f1") -> BlockMatrix:
    """Pivot summary rows to a (blocks x classifiers) matrix of means.

    Every classifier must cover every block; holes name the offenders.
    """
    mean_field = metric + "_mean"
    if mean_field not in SummaryRow.__dataclass_fields__:
        raise ValueError("unknown metric %r" % metric)
    classifiers = sorted({r.classifier for r in summaries})
    blocks = sorted({(r.target, r.filter_threshold) for r in summaries})
    index = {}
    for r in summaries:
        index[((r.target, r.filter_threshold), r.classifier)] = getattr(r, mean_field)
    missing = [
        "%s@%s for %s" % (b[0], b[1], c)
        for b in blocks
        for c in classifiers
        if (b, c) not in index
    ]
    if missing:
        raise ValueError("incomplete block table; missing: %s" % "; ".join(missing[:10]))
    values = np.array([[index[(b, c)] for c in classifiers] for b in blocks])
    return BlockMatrix(
        values=values,
        treatments=tuple(classifiers),
        blocks=tuple("%s@%d" % (t, thr) for t, thr in blocks),
    )
