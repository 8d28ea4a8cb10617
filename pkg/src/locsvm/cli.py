"""Command-line interface.

Four subcommands cover the full workflow:

* ``generate``: draw a synthetic family to LIBSVM plus truth CSV files.
* ``train``: fit one method on a LIBSVM file and save the model JSON.
* ``evaluate``: measure a saved model on a test file.
* ``benchmark``: repeat generate/split, train, evaluate over methods
  and sample sizes, writing per-run and aggregate CSV rows; with
  several sizes this doubles as a learning-curve run.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure.  When ``--seed`` is omitted the ``LOCSVM_SEED``
environment variable is used, then 0.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .data import read_libsvm, write_libsvm
from .errors import ConfigError, DataFormatError, DimensionMismatchError, NumericalError
from .estimators import (
    MethodSpec,
    VpSvmModel,
    load_model,
    predict_many,
    save_model,
    train_with_spec,
)
from .evaluation import (
    benchmark,
    dataset_source,
    report_row,
    synthetic_source,
    write_report_csv,
)
from .selection import write_selection_trace
from .synthetic import (
    SyntheticSpec,
    estimate_bayes_risk,
    generate_synthetic,
    read_truth_csv,
    write_truth_csv,
)

_SYNTH_KINDS = ("I", "II", "III", "IV", "V")


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("LOCSVM_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"LOCSVM_SEED={env!r} is not an integer")


def _method_spec(args: argparse.Namespace, name: str) -> MethodSpec:
    return MethodSpec(
        name=name,
        radius=args.radius,
        num_chunks=args.chunks,
        grid_size=args.grid_size,
        folds=args.folds,
        clip_bound=args.clip_bound,
        clip_chunk_outputs=not args.no_chunk_clip,
        tv_size_lambda=args.tv_lambdas,
        tv_size_gamma=args.tv_gammas,
        beta=args.beta,
        alpha_smooth=args.alpha,
        c1=args.c1,
        c2=args.c2,
        c3=args.c3,
    )


def _add_method_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--radius", type=float, default=None, help="cover radius (vp, tv)")
    parser.add_argument("--chunks", type=int, default=None, help="number of random chunks (rc)")
    parser.add_argument("--grid-size", type=int, default=10, help="points per grid axis")
    parser.add_argument("--folds", type=int, default=5, help="cross-validation folds")
    parser.add_argument(
        "-M", "--clip-bound", type=float, default=1.0, help="prediction clip bound"
    )
    parser.add_argument(
        "--no-chunk-clip",
        action="store_true",
        help="rc only: average raw chunk outputs instead of clipped ones",
    )
    parser.add_argument("--tv-lambdas", type=int, default=10, help="tv regularization net size")
    parser.add_argument("--tv-gammas", type=int, default=10, help="tv width net size")
    parser.add_argument("--beta", type=float, default=3.0, help="theory radius exponent")
    parser.add_argument("--alpha", type=float, default=1.0, help="theory smoothness")
    parser.add_argument("--c1", type=float, default=1.0, help="theory radius constant")
    parser.add_argument("--c2", type=float, default=1.0, help="theory regularization constant")
    parser.add_argument("--c3", type=float, default=1.0, help="theory width constant")
    parser.add_argument("--workers", type=int, default=1, help="parallel workers")
    parser.add_argument("--seed", type=int, default=None, help="run seed (default: LOCSVM_SEED, then 0)")


def cmd_generate(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    spec = SyntheticSpec(kind=args.type, n_train=args.n_train, n_test=args.n_test, seed=seed)
    train, test = generate_synthetic(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_libsvm(out / "train.libsvm", train.as_dataset())
    write_libsvm(out / "test.libsvm", test.as_dataset())
    write_truth_csv(out / "train_truth.csv", train)
    write_truth_csv(out / "test_truth.csv", test)
    print(
        f"generated type={spec.kind} d={spec.d} n_train={train.n} n_test={test.n} "
        f"seed={seed} bayes_risk_estimate={estimate_bayes_risk(test):.6g}"
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    data = read_libsvm(args.train)
    spec = _method_spec(args, args.method)
    model, report = train_with_spec(data, spec, seed=seed, workers=args.workers)
    if args.model_out:
        save_model(args.model_out, model)
    if args.trace_out:
        write_selection_trace(args.trace_out, model.selections)
    print(
        f"trained method={report.method} n={report.n_train} "
        f"working_sets={report.num_working_sets} ws_median={report.ws_size_median:g} "
        f"ws_min={report.ws_size_min} ws_max={report.ws_size_max} "
        f"train_s={report.train_seconds:.3f}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    model = load_model(args.model)
    test = read_libsvm(args.test)
    truths = read_truth_csv(args.truth) if args.truth else None
    start = time.perf_counter()
    predictions = predict_many(model, test.X)
    test_seconds = time.perf_counter() - start
    test_error = float(np.mean((test.y - predictions) ** 2))
    line = f"test_error={test_error:.6g} test_s={test_seconds:.3f}"
    l2 = float("nan")
    bayes = float("nan")
    if truths is not None:
        if truths.n != test.n:
            raise DataFormatError(
                f"truth file has {truths.n} rows but the test set has {test.n}"
            )
        l2 = float(np.sqrt(np.mean((predictions - truths.bayes) ** 2)))
        bayes = estimate_bayes_risk(truths)
        line += f" l2_error={l2:.6g} bayes_risk_estimate={bayes:.6g}"
    print(line)
    if args.report_out:
        if isinstance(model, VpSvmModel):
            method, knob = "vp", model.cover.radius
            sizes = [m.support_inputs.shape[0] for m in model.cell_models]
        else:
            method, knob = "rc", float(len(model.chunk_models))
            sizes = [m.support_inputs.shape[0] for m in model.chunk_models]
        row = {
            "data_set": Path(args.test).name,
            "n_train": int(sum(sizes)),
            "n_test": test.n,
            "method": method,
            "radius_or_chunks": knob,
            "runs": 1,
            "train_s": float("nan"),
            "test_s": test_seconds,
            "test_err_mean": test_error,
            "test_err_std": 0.0,
            "l2_mean": l2,
            "l2_std": 0.0,
            "num_ws": len(sizes),
            "ws_median": float(np.median(sizes)),
            "ws_min": int(min(sizes)),
            "ws_max": int(max(sizes)),
            "seed": seed,
            "train_ratio_vs_global": float("nan"),
        }
        write_report_csv(args.report_out, [row])
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("no methods given")
    specs = [_method_spec(args, name) for name in methods]
    sizes = [int(s) for s in str(args.sizes).split(",") if s.strip()]
    if not sizes:
        raise ConfigError("no training sizes given")

    file_data = None
    if args.data != "synthetic":
        file_data = read_libsvm(args.data)
    elif not args.type:
        raise ConfigError("synthetic benchmarks need --type")

    all_rows: list[dict] = []
    curves: dict[str, list[tuple[int, float]]] = {name: [] for name in methods}
    for size in sizes:
        if file_data is None:
            source = synthetic_source(args.type, size, args.n_test)
        else:
            source = dataset_source(file_data, size, args.n_test, Path(args.data).name)
        result = benchmark(specs, source, args.reps, seed=seed, workers=args.workers)
        all_rows.extend(report_row(r) for r in result.reports)
        all_rows.extend(result.aggregates)
        for agg in result.aggregates:
            curves[agg["method"]].append((size, agg["test_err_mean"]))
            print(
                f"aggregate method={agg['method']} n={agg['n_train']} "
                f"test_err={agg['test_err_mean']:.6g}+-{agg['test_err_std']:.2g} "
                f"l2={agg['l2_mean']:.6g} train_s={agg['train_s']:.3f} "
                f"num_ws={agg['num_ws']:g}"
            )
    if len(sizes) > 1:
        for name in methods:
            for size, err in curves[name]:
                print(f"curve method={name} n={size} test_err_mean={err:.6g}")
    if args.report_out:
        write_report_csv(args.report_out, all_rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locsvm",
        description="Localized least-squares SVMs on Voronoi partitions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="draw a synthetic dataset")
    p_gen.add_argument("--type", required=True, choices=_SYNTH_KINDS)
    p_gen.add_argument("--n-train", type=int, default=10000)
    p_gen.add_argument("--n-test", type=int, default=10000)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out-dir", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="train one method on a LIBSVM file")
    p_train.add_argument("--method", required=True, choices=("vp", "rc", "global", "tv", "theory"))
    p_train.add_argument("--train", required=True, help="LIBSVM training file")
    p_train.add_argument("--model-out", default=None, help="where to write the model JSON")
    p_train.add_argument("--trace-out", default=None, help="where to write the selection CSV")
    _add_method_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a saved model")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--test", required=True, help="LIBSVM test file")
    p_eval.add_argument("--truth", default=None, help="truth CSV for Bayes comparisons")
    p_eval.add_argument("--report-out", default=None)
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("benchmark", help="repeated train/evaluate over methods and sizes")
    p_bench.add_argument("--data", default="synthetic", help="'synthetic' or a LIBSVM file")
    p_bench.add_argument("--type", default=None, choices=_SYNTH_KINDS)
    p_bench.add_argument("--sizes", required=True, help="comma-separated training sizes")
    p_bench.add_argument("--n-test", type=int, default=10000)
    p_bench.add_argument("--methods", required=True, help="comma-separated method names")
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--report-out", default=None)
    _add_method_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, DimensionMismatchError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
