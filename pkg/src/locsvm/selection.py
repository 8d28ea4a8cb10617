"""Hyperparameter selection for working sets.

Three schemes are provided:

* ``kfold_select``: seeded k-fold cross-validation over a geometric
  ``(lambda, gamma)`` grid, the default for benchmarking.  The grid is
  sized from the working set, folds are reused across all grid pairs,
  and the clipped held-out risk decides.
* ``tv_select``: a train/validation split of the dataset into a first
  half ``D1`` (training) and remainder ``D2`` (validation).  Every cell
  trains one model per pair of a fixed parameter net on its ``D1``
  points and keeps the pair minimizing its share of the ``D2`` risk;
  because the cells partition ``D2``, the assembled predictor's ``D2``
  risk equals the sum of the per-cell minima.
* ``theory_params``: closed-form schedules radius ``c1 * n^(-1/(beta d))``,
  regularization ``c2 * r^d / n`` and width ``c3 * n^(-1/(2 alpha + d))``
  that need no data-driven search.

Ties in a selection always resolve to the smallest regularization
value, then the smallest width.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .data import Dataset
from .errors import ConfigError
from .partition import VoronoiPartition
from .rng import derive_rng
from .solver import CellModel, _solve_spd, clip, gaussian_cross, gaussian_gram, train_cell, zero_model

# lower bounds of the cross-validation grid relative to the working set
_GRID_LAMBDA_LOW = 0.001
_GRID_LAMBDA_HIGH = 0.1
_GRID_GAMMA_LOW = 0.5
_GRID_GAMMA_HIGH = 10.0


@dataclass
class HyperGrid:
    """Strictly increasing candidate values for both parameters."""

    lambdas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self) -> None:
        self.lambdas = np.asarray(self.lambdas, dtype=np.float64)
        self.gammas = np.asarray(self.gammas, dtype=np.float64)
        for name, values in (("lambda", self.lambdas), ("gamma", self.gammas)):
            if values.size == 0:
                raise ConfigError(f"{name} grid is empty")
            if (values <= 0).any():
                raise ConfigError(f"{name} grid contains nonpositive values")
            if (np.diff(values) <= 0).any():
                raise ConfigError(f"{name} grid is not strictly increasing")


@dataclass
class CVConfig:
    folds: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ConfigError(f"need at least 2 folds, got {self.folds}")


@dataclass
class TVConfig:
    """Parameter nets for the train/validation scheme.

    ``lambda_net`` must live in ``(0, r^d]`` and ``gamma_net`` in
    ``(0, r]`` for the partition radius ``r``; :meth:`from_radius`
    builds geometric nets whose top ends sit exactly at those bounds
    and whose bottom ends follow the default densities ``1/n`` and
    ``n^(-1/(2+d))``.
    """

    lambda_net: np.ndarray
    gamma_net: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        grid = HyperGrid(self.lambda_net, self.gamma_net)
        self.lambda_net, self.gamma_net = grid.lambdas, grid.gammas

    @classmethod
    def from_radius(
        cls,
        radius: float,
        d: int,
        n: int,
        size_lambda: int = 10,
        size_gamma: int = 10,
        eps: float | None = None,
        delta: float | None = None,
        seed: int = 0,
    ) -> "TVConfig":
        if radius <= 0 or d < 1 or n < 1:
            raise ConfigError("need radius > 0, d >= 1, n >= 1")
        if size_lambda < 1 or size_gamma < 1:
            raise ConfigError("net sizes must be at least 1")
        eps = 1.0 / n if eps is None else eps
        delta = n ** (-1.0 / (2.0 + d)) if delta is None else delta
        if not (0 < eps <= 1) or not (0 < delta <= 1):
            raise ConfigError("net densities must lie in (0, 1]")
        lam_hi = radius**d
        lam_net = [lam_hi] if size_lambda == 1 else np.geomspace(lam_hi * eps, lam_hi, size_lambda)
        gam_net = [radius] if size_gamma == 1 else np.geomspace(radius * delta, radius, size_gamma)
        return cls(np.asarray(lam_net), np.asarray(gam_net), seed=seed)

    def validate_for_radius(self, radius: float, d: int) -> None:
        slack = 1.0 + 1e-12
        if self.lambda_net.max() > radius**d * slack:
            raise ConfigError(
                f"lambda net exceeds radius**d = {radius**d:g} for radius {radius:g}"
            )
        if self.gamma_net.max() > radius * slack:
            raise ConfigError(f"gamma net exceeds the radius {radius:g}")


@dataclass
class TheorySchedule:
    """Exponents and constants for the closed-form parameter schedules."""

    n: int
    d: int
    beta: float
    alpha_smooth: float
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ConfigError("need n >= 1 and d >= 1")
        if self.beta <= 1:
            raise ConfigError(f"beta must exceed 1, got {self.beta}")
        if self.alpha_smooth < 1:
            raise ConfigError(f"alpha_smooth must be at least 1, got {self.alpha_smooth}")
        if self.c1 <= 0 or self.c2 <= 0 or self.c3 <= 0:
            raise ConfigError("schedule constants must be positive")
        if self.c3 > self.c1:
            raise ConfigError(f"c3={self.c3} must not exceed c1={self.c1}")


@dataclass
class CellSelection:
    """Winning pair for one working set plus the full evaluation table.

    ``lam`` follows the caller's convention (working-set weight for
    cross-validation, split-size weight for the holdout scheme); NaN
    parameters mark cells where no selection could be run.
    """

    lam: float
    gamma: float
    risk: float
    evaluations: list[tuple[float, float, float]] = field(default_factory=list)


def geometric_grid(n_cell: int, d: int, size: int = 10) -> HyperGrid:
    """Geometric grid spanning the default search box for a working set.

    Regularization runs from ``0.001 / n_cell`` to ``0.1`` and kernel
    width from ``0.5 * n_cell**(-1/d)`` to ``10``, endpoints included.
    """
    if n_cell < 1 or d < 1:
        raise ConfigError("need n_cell >= 1 and d >= 1")
    if size < 2:
        raise ConfigError(f"grid size must be at least 2, got {size}")
    lam_lo, lam_hi = _GRID_LAMBDA_LOW / n_cell, _GRID_LAMBDA_HIGH
    gam_lo, gam_hi = _GRID_GAMMA_LOW * n_cell ** (-1.0 / d), _GRID_GAMMA_HIGH
    if lam_lo >= lam_hi:
        raise ConfigError(f"degenerate lambda range [{lam_lo:g}, {lam_hi:g}]")
    if gam_lo >= gam_hi:
        raise ConfigError(f"degenerate gamma range [{gam_lo:g}, {gam_hi:g}]")
    return HyperGrid(np.geomspace(lam_lo, lam_hi, size), np.geomspace(gam_lo, gam_hi, size))


def _fold_indices(m: int, folds: int, seed: int) -> list[np.ndarray]:
    # shuffled indices cut into near-equal folds (sizes differ by <= 1);
    # fewer points than folds degrades to leave-one-out
    k = min(folds, m)
    perm = derive_rng(seed, "folds").permutation(m)
    return [np.asarray(chunk) for chunk in np.array_split(perm, k)]


def _argmin_lambda_major(table: np.ndarray) -> tuple[int, int]:
    # first flat minimum in row-major order: smallest lambda, then gamma
    flat = int(np.argmin(table))
    return flat // table.shape[1], flat % table.shape[1]


def kfold_select(
    inputs: np.ndarray,
    labels: np.ndarray,
    grid: HyperGrid,
    cfg: CVConfig,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> CellSelection:
    """Pick the grid pair with the lowest clipped k-fold risk.

    The same seeded folds serve every pair.  For each pair the held-out
    risk is the mean over folds of the fold's mean squared error of
    clipped predictions.  Single-point working sets fall back to the
    middle grid pair without any evaluation.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.float64)
    m = inputs.shape[0]
    if m == 0:
        raise ConfigError("cannot select parameters for an empty working set")
    if m == 1:
        mid_lam, mid_gam = median_pair(grid)
        return CellSelection(mid_lam, mid_gam, float("nan"))

    folds = _fold_indices(m, cfg.folds, cfg.seed)
    mask = np.ones(m, dtype=bool)
    tasks = []
    for fold_id, val_idx in enumerate(folds):
        mask[:] = True
        mask[val_idx] = False
        train_idx = np.flatnonzero(mask)
        for gamma_id, gamma in enumerate(grid.gammas):
            tasks.append((fold_id, gamma_id, train_idx, val_idx, float(gamma)))

    def run(task):
        _, _, train_idx, val_idx, gamma = task
        X_tr, y_tr = inputs[train_idx], labels[train_idx]
        K = gaussian_gram(X_tr, gamma)
        K_val = gaussian_cross(inputs[val_idx], X_tr, gamma)
        y_val = labels[val_idx]
        column = np.empty(grid.lambdas.size)
        for lam_id, lam in enumerate(grid.lambdas):
            alpha = _solve_spd(K, train_idx.size * float(lam), y_tr)
            residual = y_val - clip(K_val @ alpha, clip_bound)
            column[lam_id] = float(np.mean(residual**2))
        return column

    columns = parallel_map(run, tasks, workers)
    per_fold = np.zeros((len(folds), grid.lambdas.size, grid.gammas.size))
    for (fold_id, gamma_id, _, _, _), column in zip(tasks, columns):
        per_fold[fold_id, :, gamma_id] = column
    table = per_fold.mean(axis=0)

    i, j = _argmin_lambda_major(table)
    evaluations = [
        (float(grid.lambdas[a]), float(grid.gammas[b]), float(table[a, b]))
        for a in range(grid.lambdas.size)
        for b in range(grid.gammas.size)
    ]
    return CellSelection(
        float(grid.lambdas[i]), float(grid.gammas[j]), float(table[i, j]), evaluations
    )


@dataclass
class TVSelectionResult:
    """Per-cell winners from the train/validation scheme.

    ``models`` holds the deployed cell models (trained on the cell's
    ``D1`` points with the winning pair), ``holdout_risk_total`` the sum
    of the per-cell minimal validation risks, which coincides with the
    assembled predictor's risk on ``D2``.
    """

    selections: list[CellSelection]
    models: list[CellModel]
    split_point: int
    holdout_risk_total: float


def tv_select(
    train: Dataset,
    partition: VoronoiPartition,
    cfg: TVConfig,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> TVSelectionResult:
    """Select per-cell pairs on a train/validation split of the data.

    The first ``l = n//2 + 1`` samples (in stored order) train the
    candidate models; the remaining samples validate them.  Each cell's
    validation risk is normalized by the full validation count, so the
    per-cell minima sum to the assembled predictor's validation risk.
    """
    n = train.n
    if n < 4:
        raise ConfigError(f"holdout selection needs at least 4 samples, got {n}")
    l = n // 2 + 1
    n_val = n - l
    assignment = partition.assignment

    def run(j: int) -> tuple[CellSelection, CellModel]:
        members = np.flatnonzero(assignment == j)
        fit_idx = members[members < l]
        val_idx = members[members >= l]
        X_val, y_val = train.X[val_idx], train.y[val_idx]
        if fit_idx.size == 0:
            model = zero_model(train.d, clip_bound)
            risk = float(np.sum(y_val**2) / n_val)
            return CellSelection(float("nan"), float("nan"), risk, [(float("nan"), float("nan"), risk)]), model
        X_fit, y_fit = train.X[fit_idx], train.y[fit_idx]
        table = np.empty((cfg.lambda_net.size, cfg.gamma_net.size))
        for gamma_id, gamma in enumerate(cfg.gamma_net):
            K = gaussian_gram(X_fit, float(gamma))
            K_val = gaussian_cross(X_val, X_fit, float(gamma))
            for lam_id, lam in enumerate(cfg.lambda_net):
                alpha = _solve_spd(K, l * float(lam), y_fit)
                residual = y_val - clip(K_val @ alpha, clip_bound)
                table[lam_id, gamma_id] = float(np.sum(residual**2) / n_val)
        i, k = _argmin_lambda_major(table)
        lam, gamma = float(cfg.lambda_net[i]), float(cfg.gamma_net[k])
        model = train_cell(X_fit, y_fit, lam, gamma, n_global=l, clip_bound=clip_bound)
        evaluations = [
            (float(cfg.lambda_net[a]), float(cfg.gamma_net[b]), float(table[a, b]))
            for a in range(cfg.lambda_net.size)
            for b in range(cfg.gamma_net.size)
        ]
        return CellSelection(lam, gamma, float(table[i, k]), evaluations), model

    results = parallel_map(run, list(range(partition.num_cells)), workers)
    selections = [sel for sel, _ in results]
    models = [model for _, model in results]
    total = float(np.sum([sel.risk for sel in selections])) if selections else 0.0
    return TVSelectionResult(selections, models, l, total)


def theory_params(schedule: TheorySchedule) -> tuple[float, float, float]:
    """Closed-form ``(radius, lambda, gamma)`` for a sample size.

    Warns when ``beta < 2 * alpha_smooth / d + 1``, in which case the
    width schedule is not guaranteed to stay below the radius.
    """
    s = schedule
    if s.beta < 2.0 * s.alpha_smooth / s.d + 1.0:
        warnings.warn(
            f"beta={s.beta} below 2*alpha/d + 1 = {2.0 * s.alpha_smooth / s.d + 1.0}: "
            "the width schedule may exceed the partition radius",
            stacklevel=2,
        )
    radius = s.c1 * s.n ** (-1.0 / (s.beta * s.d))
    lam = s.c2 * radius**s.d / s.n
    gamma = s.c3 * s.n ** (-1.0 / (2.0 * s.alpha_smooth + s.d))
    return float(radius), float(lam), float(gamma)


def write_selection_trace(path, selections: list[CellSelection]) -> None:
    """CSV of every evaluated (cell, lambda, gamma, risk) row."""
    with open(path, "w", encoding="utf8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", "lambda", "gamma", "risk"])
        for j, sel in enumerate(selections):
            rows = sel.evaluations or [(sel.lam, sel.gamma, sel.risk)]
            for lam, gamma, risk in rows:
                writer.writerow([j, repr(float(lam)), repr(float(gamma)), repr(float(risk))])


def median_pair(grid: HyperGrid) -> tuple[float, float]:
    """Middle grid pair, the fallback when no validation is possible."""
    return (
        float(grid.lambdas[(grid.lambdas.size - 1) // 2]),
        float(grid.gammas[(grid.gammas.size - 1) // 2]),
    )
