"""Synthetic regression families with known conditional mean and noise.

Five families are provided: types I to III are univariate (a staircase,
a kink with a jump, a modulated triangle wave), types IV and V are
bivariate (a ring staircase and a cone).  Inputs are uniform on
``[-1, 1]^d``.  Noise is the sum of two independent uniforms on
``[-c(x), c(x)]`` with an input-dependent half-width ``c``, so the
conditional noise variance is ``2 c(x)^2 / 3`` and the regression
target is exactly the base function.  Labels (train and test jointly)
are min-max scaled to ``[-1, 1]``; the stored Bayes values and noise
half-widths live in the same scaled units.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataFormatError
from .rng import derive_rng

_KINDS = ("I", "II", "III", "IV", "V")

# Base-function amplitudes, tuned so that after label scaling the mean
# conditional noise variance of each family lands on its reference
# level (asserted in the test suite; scripts/calibrate_noise_levels.py
# reproduces the fit).  Type V is the unit cone.
_AMPLITUDE = {
    "I": 1.980,
    "II": 5.618,
    "III": 2.331,
    "IV": 5.970,
    "V": 1.0,
}


class LabeledTruth(NamedTuple):
    features: np.ndarray
    label: float
    bayes_value: float
    noise_halfwidth: float


@dataclass
class SyntheticSpec:
    """Recipe for one draw of a synthetic family."""

    kind: str
    n_train: int = 10000
    n_test: int = 10000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown synthetic kind {self.kind!r}, expected one of {_KINDS}")
        if self.n_train < 1 or self.n_test < 0:
            raise ConfigError("need n_train >= 1 and n_test >= 0")

    @property
    def d(self) -> int:
        return 1 if self.kind in ("I", "II", "III") else 2


@dataclass
class TruthTable:
    """Samples bundled with their Bayes values and noise half-widths.

    Behaves as an ordered sequence of :class:`LabeledTruth`; the arrays
    are exposed directly for vectorized evaluation.
    """

    X: np.ndarray
    y: np.ndarray
    bayes: np.ndarray
    halfwidth: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> LabeledTruth:
        return LabeledTruth(
            self.X[i], float(self.y[i]), float(self.bayes[i]), float(self.halfwidth[i])
        )

    def __iter__(self) -> Iterator[LabeledTruth]:
        for i in range(self.n):
            yield self[i]

    def as_dataset(self) -> Dataset:
        return Dataset(self.X, self.y)


def base_value(kind: str, X: np.ndarray) -> np.ndarray:
    """Evaluate the (unscaled) regression function of a family."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    amplitude = _AMPLITUDE[kind]
    if kind == "I":
        x = X[:, 0]
        heights = np.array([-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0])
        cell = np.clip(np.floor((x + 1.0) / 0.5).astype(int), 0, 3)
        return amplitude * heights[cell]
    if kind == "II":
        x = X[:, 0]
        return amplitude * (np.abs(x) + 0.5 * (x > 0.45))
    if kind == "III":
        x = X[:, 0]
        # triangle wave of period 1/2 with amplitude shrinking to the edges
        wave = (2.0 / np.pi) * np.arcsin(np.sin(4.0 * np.pi * x))
        return amplitude * (1.0 - np.abs(x)) * wave
    if kind == "IV":
        r = np.linalg.norm(X, axis=1)
        return amplitude * np.minimum(np.floor(r / 0.35), 3.0) / 3.0
    if kind == "V":
        return amplitude * np.linalg.norm(X, axis=1)
    raise ConfigError(f"unknown synthetic kind {kind!r}")


def noise_halfwidth(kind: str, X: np.ndarray) -> np.ndarray:
    """Half-width ``c(x)`` of the uniform noise components (unscaled)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if kind in ("I", "II", "III"):
        return 0.25 * (3.0 * np.sin(0.5 * np.pi * np.abs(X[:, 0])) + 1.0)
    return 0.25 * (np.sin(0.25 * np.pi * (np.abs(X[:, 0]) + np.abs(X[:, 1]))) + 1.0)


def _enforce_noise_bound(y: np.ndarray, bayes: np.ndarray, halfwidth: np.ndarray) -> np.ndarray:
    # scaling rounds labels independently of bayes values, which can push
    # |y - bayes| past 2c by an ulp; nudge such labels back inside
    bound = 2.0 * halfwidth
    for _ in range(4):
        over = np.abs(y - bayes) > bound
        if not over.any():
            break
        y[over] = np.nextafter(y[over], bayes[over])
    assert (np.abs(y - bayes) <= bound).all()
    return y


def generate_synthetic(spec: SyntheticSpec) -> tuple[TruthTable, TruthTable]:
    """Draw train and test tables in scaled units.

    All labels (train and test together) are min-max scaled to
    ``[-1, 1]``; Bayes values and half-widths are mapped by the same
    affine transform, so ``|label - bayes_value| <= 2 * noise_halfwidth``
    holds exactly for every stored sample.
    """
    n = spec.n_train + spec.n_test
    X = derive_rng(spec.seed, "inputs").uniform(-1.0, 1.0, size=(n, spec.d))
    w = derive_rng(spec.seed, "noise").uniform(-1.0, 1.0, size=(n, 2))
    bayes = base_value(spec.kind, X)
    c = noise_halfwidth(spec.kind, X)
    y = bayes + c * w[:, 0] + c * w[:, 1]

    lo, hi = float(y.min()), float(y.max())
    slope = 2.0 / (hi - lo)
    y = (y - lo) * slope - 1.0
    bayes = (bayes - lo) * slope - 1.0
    halfwidth = c * slope
    y = _enforce_noise_bound(y, bayes, halfwidth)

    def table(sl: slice) -> TruthTable:
        return TruthTable(X[sl], y[sl], bayes[sl], halfwidth[sl])

    return table(slice(0, spec.n_train)), table(slice(spec.n_train, n))


def estimate_bayes_risk(truths: TruthTable) -> float:
    """Mean conditional noise variance ``2 c(x)^2 / 3`` in scaled units.

    This is the least-squares risk of the Bayes predictor on the
    family, estimated over the given sample of inputs.
    """
    if truths.n == 0:
        raise ConfigError("cannot estimate Bayes risk from an empty table")
    return float(np.mean(2.0 * truths.halfwidth**2 / 3.0))


def write_truth_csv(path, truths: TruthTable) -> None:
    """Write ``x1..xd, y, bayes_value, noise_halfwidth`` rows."""
    d = truths.X.shape[1]
    with open(path, "w", encoding="utf8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(d)] + ["y", "bayes_value", "noise_halfwidth"])
        for i in range(truths.n):
            row = [repr(float(v)) for v in truths.X[i]]
            row += [repr(float(truths.y[i])), repr(float(truths.bayes[i])),
                    repr(float(truths.halfwidth[i]))]
            writer.writerow(row)


def read_truth_csv(path) -> TruthTable:
    with open(path, "r", encoding="utf8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty truth file")
        if header[-3:] != ["y", "bayes_value", "noise_halfwidth"]:
            raise DataFormatError(f"{path}: unexpected truth columns {header!r}")
        d = len(header) - 3
        rows = [list(map(float, row)) for row in reader if row]
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), d + 3)
    return TruthTable(values[:, :d], values[:, d], values[:, d + 1], values[:, d + 2])
