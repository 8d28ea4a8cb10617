"""Compare the localized, global, and random-chunk estimators.

Runs the benchmark loop on one synthetic family over several training
sizes and prints the aggregate error, timing, and the train-time ratio
against the global model.  A CSV with per-run and aggregate rows can be
written for further analysis.

Example:

    python scripts/desk_benchmark.py --type I --sizes 1000,10000 \
        --reps 10 --radius 0.25 --chunks 10 --out bench.csv
"""

import argparse

from locsvm import MethodSpec, benchmark, report_row, synthetic_source, write_report_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--type", default="I", choices=("I", "II", "III", "IV", "V"))
    parser.add_argument("--sizes", default="1000,10000")
    parser.add_argument("--n-test", type=int, default=10000)
    parser.add_argument("--reps", type=int, default=10)
    parser.add_argument("--radius", type=float, default=0.25)
    parser.add_argument("--chunks", type=int, default=10)
    parser.add_argument("--grid-size", type=int, default=3)
    parser.add_argument("--folds", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default=None, help="CSV output path")
    args = parser.parse_args()

    shared = dict(grid_size=args.grid_size, folds=args.folds)
    methods = [
        MethodSpec("vp", radius=args.radius, **shared),
        MethodSpec("global", **shared),
        MethodSpec("rc", num_chunks=args.chunks, **shared),
    ]
    rows = []
    for size in (int(s) for s in args.sizes.split(",")):
        source = synthetic_source(args.type, size, args.n_test)
        result = benchmark(methods, source, args.reps, seed=args.seed, workers=args.workers)
        rows.extend(report_row(r) for r in result.reports)
        rows.extend(result.aggregates)
        for agg in result.aggregates:
            print(
                f"type={args.type} n={size} method={agg['method']:6s} "
                f"test_err={agg['test_err_mean']:.5f}+-{agg['test_err_std']:.5f} "
                f"l2={agg['l2_mean']:.5f} train_s={agg['train_s']:.2f} "
                f"ratio_vs_global={agg['train_ratio_vs_global']:.3f}"
            )
    if args.out:
        write_report_csv(args.out, rows)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
