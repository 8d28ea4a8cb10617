"""Risk evaluation and benchmark orchestration.

Risks are mean squared errors on a test set.  The restricted risk of a
cell keeps the full test count as normalizer, so the restricted risks
of the cells of a partition sum exactly to the total empirical risk.
The benchmark runner repeats (generate or split, train, evaluate) with
independent derived seeds and reports per-run rows plus an aggregate
row of means and sample standard deviations per method.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset, split_train_test
from .errors import ConfigError
from .estimators import MethodSpec, predict_many, train_with_spec
from .rng import derive_seed
from .synthetic import SyntheticSpec, TruthTable, estimate_bayes_risk, generate_synthetic

REPORT_COLUMNS = [
    "data_set",
    "n_train",
    "n_test",
    "method",
    "radius_or_chunks",
    "runs",
    "train_s",
    "test_s",
    "test_err_mean",
    "test_err_std",
    "l2_mean",
    "l2_std",
    "num_ws",
    "ws_median",
    "ws_min",
    "ws_max",
    "seed",
    "train_ratio_vs_global",
]


@dataclass
class EvalReport:
    """One trained model measured on one test set."""

    data_set: str
    method: str
    n_train: int
    n_test: int
    radius_or_chunks: float
    seed: int
    test_error: float
    l2_error: float
    bayes_risk: float
    train_seconds: float
    test_seconds: float
    num_working_sets: int
    ws_size_median: float
    ws_size_min: int
    ws_size_max: int


def _as_predictor(model):
    if callable(model):
        return model
    return lambda X: predict_many(model, X)


def empirical_risk(model, test: Dataset) -> float:
    """Mean squared error of the model's predictions on the test set."""
    if test.n == 0:
        raise ConfigError("cannot evaluate on an empty test set")
    predictions = _as_predictor(model)(test.X)
    return float(np.mean((test.y - predictions) ** 2))


def restricted_risk(model, test: Dataset, assignment: np.ndarray, cell: int) -> float:
    """Squared-error mass of one cell, normalized by the full test count.

    Summing over all cells of a partition reproduces
    :func:`empirical_risk` exactly, because every test point belongs to
    exactly one cell.
    """
    if test.n == 0:
        raise ConfigError("cannot evaluate on an empty test set")
    assignment = np.asarray(assignment)
    idx = np.flatnonzero(assignment == cell)
    if idx.size == 0:
        return 0.0
    predictions = _as_predictor(model)(test.X[idx])
    return float(np.sum((test.y[idx] - predictions) ** 2) / test.n)


def l2_error(model, truths: TruthTable) -> float:
    """Root mean squared distance to the Bayes function on the inputs."""
    if truths.n == 0:
        raise ConfigError("cannot evaluate on an empty truth table")
    predictions = _as_predictor(model)(truths.X)
    return float(np.sqrt(np.mean((predictions - truths.bayes) ** 2)))


def run_experiment(
    spec: MethodSpec,
    train: Dataset,
    test: Dataset,
    truths: TruthTable | None = None,
    data_set: str = "data",
    seed: int = 0,
    workers: int = 1,
) -> EvalReport:
    """Train one method and measure it on one test set."""
    model, report = train_with_spec(train, spec, seed=seed, workers=workers)
    start = time.perf_counter()
    predictions = predict_many(model, test.X)
    test_seconds = time.perf_counter() - start
    test_error = float(np.mean((test.y - predictions) ** 2))
    if truths is not None:
        l2 = float(np.sqrt(np.mean((predictions - truths.bayes) ** 2)))
        bayes = estimate_bayes_risk(truths)
    else:
        l2 = float("nan")
        bayes = float("nan")
    return EvalReport(
        data_set=data_set,
        method=spec.name,
        n_train=train.n,
        n_test=test.n,
        radius_or_chunks=spec.knob_value(train),
        seed=seed,
        test_error=test_error,
        l2_error=l2,
        bayes_risk=bayes,
        train_seconds=report.train_seconds,
        test_seconds=test_seconds,
        num_working_sets=report.num_working_sets,
        ws_size_median=report.ws_size_median,
        ws_size_min=report.ws_size_min,
        ws_size_max=report.ws_size_max,
    )


@dataclass
class BenchmarkResult:
    """Per-run reports plus one aggregate row per method."""

    reports: list[EvalReport]
    aggregates: list[dict]


def _aggregate(reports: list[EvalReport], base_seed: int) -> list[dict]:
    rows = []
    methods: list[str] = []
    for report in reports:
        if report.method not in methods:
            methods.append(report.method)
    by_method = {m: [r for r in reports if r.method == m] for m in methods}
    train_means = {m: float(np.mean([r.train_seconds for r in rs])) for m, rs in by_method.items()}
    global_time = train_means.get("global")
    for method in methods:
        runs = by_method[method]
        errors = np.asarray([r.test_error for r in runs])
        l2s = np.asarray([r.l2_error for r in runs])
        std = float(errors.std(ddof=1)) if len(runs) > 1 else 0.0
        l2_std = float(l2s.std(ddof=1)) if len(runs) > 1 else 0.0
        ratio = float("nan")
        if global_time and method != "global":
            ratio = train_means[method] / global_time
        rows.append(
            {
                "data_set": runs[0].data_set,
                "n_train": runs[0].n_train,
                "n_test": runs[0].n_test,
                "method": method,
                "radius_or_chunks": runs[0].radius_or_chunks,
                "runs": len(runs),
                "train_s": train_means[method],
                "test_s": float(np.mean([r.test_seconds for r in runs])),
                "test_err_mean": float(errors.mean()),
                "test_err_std": std,
                "l2_mean": float(l2s.mean()),
                "l2_std": l2_std,
                "num_ws": float(np.mean([r.num_working_sets for r in runs])),
                "ws_median": float(np.mean([r.ws_size_median for r in runs])),
                "ws_min": min(r.ws_size_min for r in runs),
                "ws_max": max(r.ws_size_max for r in runs),
                "seed": base_seed,
                "train_ratio_vs_global": ratio,
            }
        )
    return rows


def benchmark(
    methods: list[MethodSpec],
    data_source,
    repetitions: int,
    seed: int = 0,
    workers: int = 1,
) -> BenchmarkResult:
    """Repeat (draw data, train, evaluate) for each method.

    ``data_source(rep_seed)`` must yield
    ``(train, test, truths_or_None, data_set_name)``; each repetition
    receives an independently derived seed that also seeds training.
    """
    if repetitions < 1:
        raise ConfigError("need at least one repetition")
    reports: list[EvalReport] = []
    for rep in range(repetitions):
        rep_seed = derive_seed(seed, "rep", rep)
        train, test, truths, name = data_source(rep_seed)
        for spec in methods:
            reports.append(
                run_experiment(spec, train, test, truths, name, seed=rep_seed, workers=workers)
            )
    return BenchmarkResult(reports, _aggregate(reports, seed))


def synthetic_source(kind: str, n_train: int, n_test: int):
    """Data source drawing a fresh synthetic sample per repetition."""

    def source(rep_seed: int):
        train_truths, test_truths = generate_synthetic(
            SyntheticSpec(kind=kind, n_train=n_train, n_test=n_test, seed=rep_seed)
        )
        return train_truths.as_dataset(), test_truths.as_dataset(), test_truths, f"synthetic-{kind}"

    return source


def dataset_source(data: Dataset, n_train: int, n_test: int, name: str = "data"):
    """Data source re-splitting a fixed dataset per repetition."""

    def source(rep_seed: int):
        train, test = split_train_test(data, n_train, n_test, rep_seed)
        return train, test, None, name

    return source


def report_row(report: EvalReport) -> dict:
    """Render one run as a CSV row (runs=1, zero deviations)."""
    return {
        "data_set": report.data_set,
        "n_train": report.n_train,
        "n_test": report.n_test,
        "method": report.method,
        "radius_or_chunks": report.radius_or_chunks,
        "runs": 1,
        "train_s": report.train_seconds,
        "test_s": report.test_seconds,
        "test_err_mean": report.test_error,
        "test_err_std": 0.0,
        "l2_mean": report.l2_error,
        "l2_std": 0.0,
        "num_ws": report.num_working_sets,
        "ws_median": report.ws_size_median,
        "ws_min": report.ws_size_min,
        "ws_max": report.ws_size_max,
        "seed": report.seed,
        "train_ratio_vs_global": float("nan"),
    }


def write_report_csv(path, rows: list[dict]) -> None:
    """Write rows under the fixed report schema."""
    with open(path, "w", encoding="utf8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


