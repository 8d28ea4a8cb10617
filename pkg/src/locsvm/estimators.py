"""Training front ends: localized, global, and random-chunk estimators.

The localized estimator covers the training inputs with a
farthest-first cover, partitions them into Voronoi cells, selects
hyperparameters per cell, and fits one kernel model per cell; queries
are routed to the model of their nearest center.  The global estimator
is the same pipeline with a radius wide enough that a single cell
survives, so it shares every code path.  The random-chunk estimator
splits samples uniformly at random into equally sized chunks, fits each
like a cell, and averages the chunk predictions.

Randomness (fold shuffles, chunk membership) is derived per working set
from one seed and the working-set index, and parallel work is joined by
position, so training results are byte-identical for any worker count.
BLAS pools are pinned to one thread inside training and prediction for
the same reason.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map, single_thread_blas
from .data import Dataset
from .errors import ConfigError, DataFormatError, DimensionMismatchError
from .partition import Cover, assign_voronoi, build_partition, farthest_first_cover
from .rng import derive_rng, derive_seed
from .selection import (
    CellSelection,
    CVConfig,
    TheorySchedule,
    TVConfig,
    geometric_grid,
    kfold_select,
    theory_params,
    tv_select,
)
from .solver import (
    CellModel,
    cell_from_record,
    cell_to_record,
    clip,
    predict_clipped_many,
    predict_many as _predict_cell_many,
    train_cell,
    train_cell_local,
    zero_model,
)

_MODEL_FORMAT = "locsvm-model"
_MODEL_VERSION = 1


@dataclass
class GridConfig:
    """Size of the per-working-set geometric search grid."""

    size: int = 10

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ConfigError(f"grid size must be at least 2, got {self.size}")


@dataclass
class TrainReport:
    """Wall-clock and working-set statistics for one training run."""

    method: str
    n_train: int
    num_working_sets: int
    ws_size_median: float
    ws_size_min: int
    ws_size_max: int
    train_seconds: float
    workers: int


@dataclass
class VpSvmModel:
    """Cover plus one cell model per center, index-aligned."""

    cover: Cover
    cell_models: list[CellModel]
    selections: list[CellSelection]
    clip_bound: float

    def __post_init__(self) -> None:
        if len(self.cell_models) != self.cover.m:
            raise DimensionMismatchError(
                f"{len(self.cell_models)} cell models for {self.cover.m} centers"
            )

    @property
    def d(self) -> int:
        return self.cover.d


@dataclass
class RcSvmModel:
    """Chunk models whose predictions are averaged, then clipped."""

    chunk_models: list[CellModel]
    selections: list[CellSelection]
    clip_bound: float
    d: int
    clip_chunk_outputs: bool = True

    def __post_init__(self) -> None:
        if not self.chunk_models:
            raise ConfigError("a random-chunk model needs at least one chunk")


def _report(method: str, sizes: np.ndarray, n_train: int, seconds: float, workers: int) -> TrainReport:
    return TrainReport(
        method=method,
        n_train=n_train,
        num_working_sets=int(sizes.size),
        ws_size_median=float(np.median(sizes)),
        ws_size_min=int(sizes.min()),
        ws_size_max=int(sizes.max()),
        train_seconds=float(seconds),
        workers=int(workers),
    )


def _fit_working_set(
    X: np.ndarray,
    y: np.ndarray,
    d: int,
    grid_cfg: GridConfig,
    folds: int,
    seed: int,
    clip_bound: float,
    workers: int,
) -> tuple[CellSelection, CellModel]:
    """Cross-validate and fit one working set (cell or chunk)."""
    if X.shape[0] == 0:
        return CellSelection(float("nan"), float("nan"), float("nan")), zero_model(d, clip_bound)
    grid = geometric_grid(X.shape[0], d, grid_cfg.size)
    selection = kfold_select(X, y, grid, CVConfig(folds, seed), clip_bound, workers=workers)
    model = train_cell_local(X, y, selection.lam, selection.gamma, clip_bound)
    return selection, model


def train_vp_svm(
    train: Dataset,
    radius: float,
    grid_cfg: GridConfig | None = None,
    cv_cfg: CVConfig | None = None,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> tuple[VpSvmModel, TrainReport]:
    """Fit the localized estimator on a Voronoi cover of the inputs."""
    grid_cfg = grid_cfg or GridConfig()
    cv_cfg = cv_cfg or CVConfig()
    start = time.perf_counter()
    with single_thread_blas():
        cover = farthest_first_cover(train.X, radius)
        partition = build_partition(train.X, cover)
        cells = partition.cells

        def fit(j: int) -> tuple[CellSelection, CellModel]:
            idx = cells[j]
            return _fit_working_set(
                train.X[idx],
                train.y[idx],
                train.d,
                grid_cfg,
                cv_cfg.folds,
                derive_seed(cv_cfg.seed, "ws", j),
                clip_bound,
                workers if cover.m == 1 else 1,
            )

        results = parallel_map(fit, range(cover.m), 1 if cover.m == 1 else workers)
    seconds = time.perf_counter() - start
    model = VpSvmModel(cover, [m for _, m in results], [s for s, _ in results], clip_bound)
    report = _report("vp", partition.cell_sizes(), train.n, seconds, workers)
    return model, report


def train_global(
    train: Dataset,
    grid_cfg: GridConfig | None = None,
    cv_cfg: CVConfig | None = None,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> tuple[VpSvmModel, TrainReport]:
    """Fit one model on all samples: the localized pipeline, one cell.

    The cover radius is the reach of the first sample (padded by a
    relative margin so no second center can appear), which makes this
    literally the localized estimator with a single working set.
    """
    if train.n == 0:
        raise ConfigError("cannot train on an empty dataset")
    diffs = train.X - train.X[0]
    reach = float(np.sqrt(np.max(np.einsum("ij,ij->i", diffs, diffs))))
    radius = reach * (1.0 + 1e-12) if reach > 0 else 1.0
    model, report = train_vp_svm(train, radius, grid_cfg, cv_cfg, clip_bound, workers)
    report.method = "global"
    return model, report


def train_rc_svm(
    train: Dataset,
    num_chunks: int,
    grid_cfg: GridConfig | None = None,
    cv_cfg: CVConfig | None = None,
    seed: int = 0,
    clip_bound: float = 1.0,
    workers: int = 1,
    clip_chunk_outputs: bool = True,
) -> tuple[RcSvmModel, TrainReport]:
    """Fit the random-chunk estimator.

    Samples are assigned to ``num_chunks`` chunks by a seeded random
    permutation; chunk sizes differ by at most one, the first
    ``n mod num_chunks`` chunks being larger.  Each chunk is selected
    and fit exactly like a cell of the localized estimator.
    """
    grid_cfg = grid_cfg or GridConfig()
    cv_cfg = cv_cfg or CVConfig()
    if num_chunks < 1 or num_chunks > train.n:
        raise ConfigError(f"need 1 <= num_chunks <= {train.n}, got {num_chunks}")
    start = time.perf_counter()
    with single_thread_blas():
        perm = derive_rng(seed, "chunks").permutation(train.n)
        base, extra = divmod(train.n, num_chunks)
        chunks: list[np.ndarray] = []
        offset = 0
        for j in range(num_chunks):
            size = base + (1 if j < extra else 0)
            chunks.append(np.sort(perm[offset:offset + size]))
            offset += size

        def fit(j: int) -> tuple[CellSelection, CellModel]:
            idx = chunks[j]
            return _fit_working_set(
                train.X[idx],
                train.y[idx],
                train.d,
                grid_cfg,
                cv_cfg.folds,
                derive_seed(cv_cfg.seed, "ws", j),
                clip_bound,
                workers if num_chunks == 1 else 1,
            )

        results = parallel_map(fit, range(num_chunks), 1 if num_chunks == 1 else workers)
    seconds = time.perf_counter() - start
    model = RcSvmModel(
        chunk_models=[m for _, m in results],
        selections=[s for s, _ in results],
        clip_bound=clip_bound,
        d=train.d,
        clip_chunk_outputs=clip_chunk_outputs,
    )
    sizes = np.asarray([len(c) for c in chunks])
    report = _report("rc", sizes, train.n, seconds, workers)
    return model, report


def train_tv_vp_svm(
    train: Dataset,
    radius: float,
    tv_cfg: TVConfig | None = None,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> tuple[VpSvmModel, TrainReport]:
    """Fit the localized estimator with holdout-based selection.

    The cover and partition are built on all training inputs; models
    are trained on the first-half samples of each cell and the deployed
    model is the holdout winner itself (no refit on the full cell).
    """
    start = time.perf_counter()
    with single_thread_blas():
        cover = farthest_first_cover(train.X, radius)
        partition = build_partition(train.X, cover)
        if tv_cfg is None:
            tv_cfg = TVConfig.from_radius(radius, train.d, train.n)
        else:
            tv_cfg.validate_for_radius(radius, train.d)
        result = tv_select(train, partition, tv_cfg, clip_bound, workers=workers)
    seconds = time.perf_counter() - start
    model = VpSvmModel(cover, result.models, result.selections, clip_bound)
    report = _report("tv", partition.cell_sizes(), train.n, seconds, workers)
    return model, report


def train_theory_mode(
    train: Dataset,
    schedule: TheorySchedule,
    clip_bound: float = 1.0,
    workers: int = 1,
) -> tuple[VpSvmModel, TrainReport]:
    """Fit the localized estimator with scheduled parameters, no search.

    Every cell is trained with the same ``(lambda, gamma)`` from
    :func:`theory_params`, regularization weighted by the full sample
    count.
    """
    if schedule.n != train.n or schedule.d != train.d:
        raise ConfigError(
            f"schedule is for n={schedule.n}, d={schedule.d}; "
            f"dataset has n={train.n}, d={train.d}"
        )
    start = time.perf_counter()
    with single_thread_blas():
        radius, lam, gamma = theory_params(schedule)
        cover = farthest_first_cover(train.X, radius)
        partition = build_partition(train.X, cover)
        cells = partition.cells

        def fit(j: int) -> CellModel:
            idx = cells[j]
            if idx.size == 0:
                return zero_model(train.d, clip_bound)
            return train_cell(train.X[idx], train.y[idx], lam, gamma, train.n, clip_bound)

        models = parallel_map(fit, range(cover.m), workers)
    seconds = time.perf_counter() - start
    selections = [CellSelection(lam, gamma, float("nan")) for _ in range(cover.m)]
    model = VpSvmModel(cover, models, selections, clip_bound)
    report = _report("theory", partition.cell_sizes(), train.n, seconds, workers)
    return model, report


def predict_vp_many(model: VpSvmModel, X: np.ndarray) -> np.ndarray:
    """Clipped predictions, each query routed to its nearest center."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    with single_thread_blas():
        assignment = assign_voronoi(X, model.cover)
        out = np.empty(X.shape[0])
        for j in range(model.cover.m):
            idx = np.flatnonzero(assignment == j)
            if idx.size:
                out[idx] = predict_clipped_many(model.cell_models[j], X[idx])
    return out


def predict_vp(model: VpSvmModel, x: np.ndarray) -> float:
    return float(predict_vp_many(model, np.atleast_2d(x))[0])


def predict_rc_many(model: RcSvmModel, X: np.ndarray) -> np.ndarray:
    """Clipped average of the chunk predictions."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    with single_thread_blas():
        total = np.zeros(X.shape[0])
        for chunk in model.chunk_models:
            if model.clip_chunk_outputs:
                total += predict_clipped_many(chunk, X)
            else:
                total += _predict_cell_many(chunk, X)
        averaged = total / len(model.chunk_models)
    return np.asarray(clip(averaged, model.clip_bound))


def predict_rc(model: RcSvmModel, x: np.ndarray) -> float:
    return float(predict_rc_many(model, np.atleast_2d(x))[0])


def predict_many(model, X: np.ndarray) -> np.ndarray:
    """Batch prediction for either model kind."""
    if isinstance(model, VpSvmModel):
        return predict_vp_many(model, X)
    if isinstance(model, RcSvmModel):
        return predict_rc_many(model, X)
    raise ConfigError(f"cannot predict with a {type(model).__name__}")


_METHODS = ("vp", "rc", "global", "tv", "theory")


@dataclass
class MethodSpec:
    """One method plus its knobs, as selected on a command line.

    ``radius`` is required for the localized methods (``vp`` and
    ``tv``), ``num_chunks`` for the random-chunk method; the schedule
    fields only matter for ``theory``.
    """

    name: str
    radius: float | None = None
    num_chunks: int | None = None
    grid_size: int = 10
    folds: int = 5
    clip_bound: float = 1.0
    clip_chunk_outputs: bool = True
    tv_size_lambda: int = 10
    tv_size_gamma: int = 10
    beta: float = 3.0
    alpha_smooth: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0

    def __post_init__(self) -> None:
        if self.name not in _METHODS:
            raise ConfigError(f"unknown method {self.name!r}, expected one of {_METHODS}")
        if self.name in ("vp", "tv") and (self.radius is None or self.radius <= 0):
            raise ConfigError(f"method {self.name!r} needs a positive radius")
        if self.name == "rc" and (self.num_chunks is None or self.num_chunks < 1):
            raise ConfigError("method 'rc' needs num_chunks >= 1")
        if self.folds < 2:
            raise ConfigError(f"need at least 2 folds, got {self.folds}")
        if self.grid_size < 2:
            raise ConfigError(f"grid size must be at least 2, got {self.grid_size}")
        if self.clip_bound <= 0:
            raise ConfigError(f"clip bound must be positive, got {self.clip_bound}")

    def knob_value(self, train: Dataset) -> float:
        """The radius or chunk count actually used on this dataset."""
        if self.name in ("vp", "tv"):
            return float(self.radius)
        if self.name == "rc":
            return float(self.num_chunks)
        if self.name == "theory":
            schedule = TheorySchedule(
                train.n, train.d, self.beta, self.alpha_smooth, self.c1, self.c2, self.c3
            )
            return theory_params(schedule)[0]
        return float("nan")


def train_with_spec(
    train: Dataset, spec: MethodSpec, seed: int = 0, workers: int = 1
) -> tuple[VpSvmModel | RcSvmModel, TrainReport]:
    """Train by method name; all run randomness derives from ``seed``."""
    grid_cfg = GridConfig(spec.grid_size)
    cv_cfg = CVConfig(spec.folds, seed)
    if spec.name == "vp":
        return train_vp_svm(train, spec.radius, grid_cfg, cv_cfg, spec.clip_bound, workers)
    if spec.name == "global":
        return train_global(train, grid_cfg, cv_cfg, spec.clip_bound, workers)
    if spec.name == "rc":
        return train_rc_svm(
            train,
            spec.num_chunks,
            grid_cfg,
            cv_cfg,
            seed=seed,
            clip_bound=spec.clip_bound,
            workers=workers,
            clip_chunk_outputs=spec.clip_chunk_outputs,
        )
    if spec.name == "tv":
        tv_cfg = TVConfig.from_radius(
            spec.radius, train.d, train.n, spec.tv_size_lambda, spec.tv_size_gamma, seed=seed
        )
        return train_tv_vp_svm(train, spec.radius, tv_cfg, spec.clip_bound, workers)
    schedule = TheorySchedule(
        train.n, train.d, spec.beta, spec.alpha_smooth, spec.c1, spec.c2, spec.c3
    )
    return train_theory_mode(train, schedule, spec.clip_bound, workers)


def _selection_to_record(sel: CellSelection) -> dict:
    return {"lambda": sel.lam, "gamma": sel.gamma, "risk": sel.risk}


def _selection_from_record(record: dict) -> CellSelection:
    return CellSelection(float(record["lambda"]), float(record["gamma"]), float(record["risk"]))


def save_model(path, model: VpSvmModel | RcSvmModel) -> None:
    """Write a model as a self-describing JSON record."""
    if isinstance(model, VpSvmModel):
        payload = {
            "format": _MODEL_FORMAT,
            "version": _MODEL_VERSION,
            "kind": "vp",
            "d": model.d,
            "clip_bound": model.clip_bound,
            "cover": {
                "centers": model.cover.centers.tolist(),
                "radius": model.cover.radius,
            },
            "cells": [cell_to_record(m) for m in model.cell_models],
            "selections": [_selection_to_record(s) for s in model.selections],
        }
    elif isinstance(model, RcSvmModel):
        payload = {
            "format": _MODEL_FORMAT,
            "version": _MODEL_VERSION,
            "kind": "rc",
            "d": model.d,
            "clip_bound": model.clip_bound,
            "clip_chunk_outputs": model.clip_chunk_outputs,
            "cells": [cell_to_record(m) for m in model.chunk_models],
            "selections": [_selection_to_record(s) for s in model.selections],
        }
    else:
        raise ConfigError(f"cannot serialize a {type(model).__name__}")
    with open(path, "w", encoding="utf8") as fh:
        json.dump(payload, fh)


def load_model(path) -> VpSvmModel | RcSvmModel:
    """Restore a model written by :func:`save_model`, bit-exact."""
    with open(path, "r", encoding="utf8") as fh:
        payload = json.load(fh)
    if payload.get("format") != _MODEL_FORMAT:
        raise DataFormatError(f"{path}: not a model file")
    if payload.get("version") != _MODEL_VERSION:
        raise DataFormatError(f"{path}: unsupported model version {payload.get('version')}")
    d = int(payload["d"])
    cells = [cell_from_record(rec, d) for rec in payload["cells"]]
    selections = [_selection_from_record(rec) for rec in payload["selections"]]
    if payload["kind"] == "vp":
        cover = Cover(
            np.asarray(payload["cover"]["centers"], dtype=np.float64),
            float(payload["cover"]["radius"]),
        )
        return VpSvmModel(cover, cells, selections, float(payload["clip_bound"]))
    if payload["kind"] == "rc":
        return RcSvmModel(
            chunk_models=cells,
            selections=selections,
            clip_bound=float(payload["clip_bound"]),
            d=d,
            clip_chunk_outputs=bool(payload.get("clip_chunk_outputs", True)),
        )
    raise DataFormatError(f"{path}: unknown model kind {payload['kind']!r}")
