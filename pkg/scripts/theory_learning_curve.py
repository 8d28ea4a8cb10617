"""Learning curve of the scheduled (search-free) localized estimator.

Trains with the closed-form radius/regularization/width schedules on a
synthetic family over growing sample sizes and prints the distance to
the Bayes function per size, averaged over seeds.

Example:

    python scripts/theory_learning_curve.py --type V --sizes 500,2000,8000
"""

import argparse

import numpy as np

from locsvm import (
    SyntheticSpec,
    TheorySchedule,
    generate_synthetic,
    l2_error,
    train_theory_mode,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--type", default="V", choices=("I", "II", "III", "IV", "V"))
    parser.add_argument("--sizes", default="500,2000,8000")
    parser.add_argument("--n-test", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=10)
    parser.add_argument("--beta", type=float, default=3.0)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--c1", type=float, default=1.0)
    parser.add_argument("--c2", type=float, default=1.0)
    parser.add_argument("--c3", type=float, default=1.0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    d = 1 if args.type in ("I", "II", "III") else 2
    for size in (int(s) for s in args.sizes.split(",")):
        errors = []
        cells = []
        for seed in range(args.reps):
            train, test = generate_synthetic(
                SyntheticSpec(args.type, n_train=size, n_test=args.n_test, seed=seed)
            )
            schedule = TheorySchedule(
                n=size, d=d, beta=args.beta, alpha_smooth=args.alpha,
                c1=args.c1, c2=args.c2, c3=args.c3,
            )
            model, report = train_theory_mode(train.as_dataset(), schedule, workers=args.workers)
            errors.append(l2_error(model, test))
            cells.append(report.num_working_sets)
        print(
            f"type={args.type} n={size} l2={np.mean(errors):.5f}+-{np.std(errors):.5f} "
            f"cells={np.mean(cells):.1f}"
        )


if __name__ == "__main__":
    main()
