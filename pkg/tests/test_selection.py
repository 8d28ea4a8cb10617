"""Hyperparameter selection: grids, cross-validation, holdout, schedules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from locsvm.data import Dataset
from locsvm.errors import ConfigError
from locsvm.partition import build_partition, farthest_first_cover
from locsvm.selection import (
    CellSelection,
    CVConfig,
    HyperGrid,
    TheorySchedule,
    TVConfig,
    _fold_indices,
    geometric_grid,
    kfold_select,
    median_pair,
    theory_params,
    tv_select,
    write_selection_trace,
)
from locsvm.solver import clip, predict_clipped_many

from oracles import conjugate_gradient, gaussian_kernel_matrix


def random_working_set(seed: int, m: int = 24, d: int = 2):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(m, d))
    y = np.sin(3 * X[:, 0]) * 0.5 + rng.normal(scale=0.1, size=m)
    return X, np.clip(y, -1.0, 1.0)


class TestHyperGrid:
    def test_rejects_empty_and_nonpositive_and_unsorted(self):
        with pytest.raises(ConfigError):
            HyperGrid(np.array([]), np.array([1.0]))
        with pytest.raises(ConfigError):
            HyperGrid(np.array([0.0, 1.0]), np.array([1.0]))
        with pytest.raises(ConfigError):
            HyperGrid(np.array([1.0, 1.0]), np.array([1.0]))
        with pytest.raises(ConfigError):
            HyperGrid(np.array([1.0]), np.array([2.0, 1.0]))

    def test_geometric_grid_endpoints(self):
        grid = geometric_grid(1000, d=1, size=10)
        assert grid.lambdas[0] == pytest.approx(1e-6, rel=1e-14)
        assert grid.lambdas[-1] == 0.1
        assert grid.gammas[0] == pytest.approx(5e-4, rel=1e-14)
        assert grid.gammas[-1] == 10.0
        assert grid.lambdas.size == grid.gammas.size == 10

    def test_geometric_grid_two_points_is_exact_endpoints(self):
        grid = geometric_grid(50, d=2, size=2)
        assert_allclose(grid.lambdas, [0.001 / 50, 0.1], rtol=1e-14)
        assert_allclose(grid.gammas, [0.5 * 50 ** -0.5, 10.0], rtol=1e-14)

    def test_geometric_grid_input_validation(self):
        with pytest.raises(ConfigError):
            geometric_grid(0, d=1)
        with pytest.raises(ConfigError):
            geometric_grid(10, d=0)
        with pytest.raises(ConfigError):
            geometric_grid(10, d=1, size=1)

    def test_median_pair_middle_of_odd_and_even(self):
        grid = HyperGrid(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0, 4.0]))
        assert median_pair(grid) == (2.0, 2.0)


class TestFolds:
    def test_partition_of_indices(self):
        folds = _fold_indices(10, 5, seed=0)
        assert len(folds) == 5
        assert sorted(len(f) for f in folds) == [2, 2, 2, 2, 2]
        assert sorted(np.concatenate(folds).tolist()) == list(range(10))

    def test_uneven_sizes_differ_by_at_most_one(self):
        folds = _fold_indices(7, 5, seed=1)
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1 and sum(sizes) == 7

    def test_leave_one_out_when_fewer_points_than_folds(self):
        folds = _fold_indices(3, 5, seed=2)
        assert len(folds) == 3 and all(len(f) == 1 for f in folds)

    def test_seed_controls_shuffle(self):
        a = _fold_indices(20, 5, seed=3)
        b = _fold_indices(20, 5, seed=3)
        c = _fold_indices(20, 5, seed=4)
        assert all((x == y).all() for x, y in zip(a, b))
        assert any((x != y).any() for x, y in zip(a, c))


def brute_force_cv(X, y, grid, folds, seed, clip_bound=1.0):
    """Reference cross-validation built on the conjugate-gradient oracle."""
    m = X.shape[0]
    parts = _fold_indices(m, folds, seed)
    table = np.zeros((grid.lambdas.size, grid.gammas.size))
    for val_idx in parts:
        train_idx = np.setdiff1d(np.arange(m), val_idx)
        for a, lam in enumerate(grid.lambdas):
            for b, gamma in enumerate(grid.gammas):
                K = gaussian_kernel_matrix(X[train_idx], X[train_idx], gamma)
                ridge = K + train_idx.size * lam * np.eye(train_idx.size)
                alpha = conjugate_gradient(ridge, y[train_idx], tol=1e-13)
                K_val = gaussian_kernel_matrix(X[val_idx], X[train_idx], gamma)
                preds = clip(K_val @ alpha, clip_bound)
                table[a, b] += np.mean((y[val_idx] - preds) ** 2)
    table /= len(parts)
    flat = int(np.argmin(table))
    i, j = flat // grid.gammas.size, flat % grid.gammas.size
    return float(grid.lambdas[i]), float(grid.gammas[j]), float(table[i, j])


class TestKfoldSelect:
    def test_matches_brute_force_oracle(self):
        """Same winner and risk as an exhaustive loop with a CG solver."""
        for seed in range(4):
            X, y = random_working_set(seed, m=18)
            grid = geometric_grid(18, d=2, size=3)
            cfg = CVConfig(folds=3, seed=seed)
            got = kfold_select(X, y, grid, cfg)
            want_lam, want_gam, want_risk = brute_force_cv(X, y, grid, 3, seed)
            assert got.lam == want_lam and got.gamma == want_gam
            assert got.risk == pytest.approx(want_risk, rel=1e-9)

    def test_deterministic_given_seed(self):
        X, y = random_working_set(5)
        grid = geometric_grid(24, d=2, size=4)
        first = kfold_select(X, y, grid, CVConfig(folds=5, seed=9))
        second = kfold_select(X, y, grid, CVConfig(folds=5, seed=9))
        assert first.lam == second.lam and first.gamma == second.gamma
        assert first.risk == second.risk
        assert first.evaluations == second.evaluations

    def test_worker_count_does_not_change_result(self):
        X, y = random_working_set(6)
        grid = geometric_grid(24, d=2, size=4)
        serial = kfold_select(X, y, grid, CVConfig(folds=4, seed=0), workers=1)
        threaded = kfold_select(X, y, grid, CVConfig(folds=4, seed=0), workers=8)
        assert serial.lam == threaded.lam and serial.gamma == threaded.gamma
        assert serial.evaluations == threaded.evaluations

    def test_zero_labels_tie_resolves_to_first_pair(self):
        """All-zero labels score every pair 0; smallest pair wins."""
        X, _ = random_working_set(7, m=12)
        grid = geometric_grid(12, d=2, size=3)
        sel = kfold_select(X, np.zeros(12), grid, CVConfig(folds=3, seed=0))
        assert sel.lam == grid.lambdas[0]
        assert sel.gamma == grid.gammas[0]
        assert sel.risk == 0.0

    def test_constant_labels_select_the_smallest_lambda(self):
        """With y constant, shrinkage is the only bias, so less is better."""
        grid = geometric_grid(20, d=1)
        for c, seed in [(0.6, 0), (-0.3, 1), (1.0, 2)]:
            X = np.random.default_rng(100 + seed).uniform(-1.0, 1.0, size=(20, 1))
            sel = kfold_select(X, np.full(20, c), grid, CVConfig(folds=5, seed=seed))
            assert sel.lam == grid.lambdas[0]

    def test_single_pair_grid_is_returned_unchanged(self):
        X, y = random_working_set(10, m=12)
        grid = HyperGrid(np.array([0.037]), np.array([1.7]))
        sel = kfold_select(X, y, grid, CVConfig(folds=3, seed=1))
        assert (sel.lam, sel.gamma) == (0.037, 1.7)
        assert len(sel.evaluations) == 1

    def test_evaluation_table_is_lambda_major_and_complete(self):
        X, y = random_working_set(8, m=10)
        grid = geometric_grid(10, d=2, size=3)
        sel = kfold_select(X, y, grid, CVConfig(folds=2, seed=1))
        assert len(sel.evaluations) == 9
        lams = [row[0] for row in sel.evaluations]
        assert lams == sorted(lams)
        assert lams[0] == lams[1] == lams[2] == grid.lambdas[0]
        best = min(sel.evaluations, key=lambda row: row[2])
        assert sel.risk == best[2]

    def test_leave_one_out_below_fold_count(self):
        X, y = random_working_set(9, m=3)
        grid = geometric_grid(3, d=2, size=2)
        sel = kfold_select(X, y, grid, CVConfig(folds=5, seed=0))
        assert math.isfinite(sel.risk)
        assert len(sel.evaluations) == 4

    def test_single_point_falls_back_to_median_pair(self):
        grid = geometric_grid(1, d=2, size=5)
        sel = kfold_select(np.zeros((1, 2)), np.ones(1), grid, CVConfig())
        assert (sel.lam, sel.gamma) == median_pair(grid)
        assert math.isnan(sel.risk)
        assert sel.evaluations == []

    def test_empty_working_set_rejected(self):
        grid = geometric_grid(5, d=2, size=2)
        with pytest.raises(ConfigError):
            kfold_select(np.zeros((0, 2)), np.zeros(0), grid, CVConfig())


class TestTVConfig:
    def test_from_radius_net_endpoints(self):
        cfg = TVConfig.from_radius(0.5, d=2, n=100, size_lambda=6, size_gamma=4)
        assert cfg.lambda_net[-1] == pytest.approx(0.25, rel=1e-14)
        assert cfg.lambda_net[0] == pytest.approx(0.25 / 100, rel=1e-14)
        assert cfg.gamma_net[-1] == 0.5
        assert cfg.gamma_net[0] == pytest.approx(0.5 * 100 ** (-1.0 / 4.0), rel=1e-14)
        cfg.validate_for_radius(0.5, 2)

    def test_singleton_nets_sit_at_upper_bound(self):
        cfg = TVConfig.from_radius(0.3, d=1, n=50, size_lambda=1, size_gamma=1)
        assert cfg.lambda_net.tolist() == [0.3]
        assert cfg.gamma_net.tolist() == [0.3]

    def test_validate_rejects_oversized_nets(self):
        cfg = TVConfig(np.array([0.1]), np.array([0.2]))
        with pytest.raises(ConfigError):
            cfg.validate_for_radius(0.1, 1)  # gamma net above the radius
        cfg2 = TVConfig(np.array([0.5]), np.array([0.05]))
        with pytest.raises(ConfigError):
            cfg2.validate_for_radius(0.1, 1)  # lambda net above radius**d

    def test_bad_densities_rejected(self):
        with pytest.raises(ConfigError):
            TVConfig.from_radius(0.5, d=1, n=10, eps=0.0)
        with pytest.raises(ConfigError):
            TVConfig.from_radius(0.5, d=1, n=10, delta=1.5)


def holdout_fixture(seed: int, n: int = 60, radius: float = 0.6):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 1))
    y = np.clip(np.sign(X[:, 0]) * 0.8 + rng.normal(scale=0.05, size=n), -1, 1)
    train = Dataset(X, y)
    partition = build_partition(X, farthest_first_cover(X, radius))
    return train, partition


class TestTVSelect:
    def test_split_point_is_half_plus_one(self):
        train, partition = holdout_fixture(0, n=61)
        cfg = TVConfig.from_radius(0.6, d=1, n=61, size_lambda=3, size_gamma=3)
        result = tv_select(train, partition, cfg)
        assert result.split_point == 61 // 2 + 1

    def test_sum_identity_with_assembled_predictor(self):
        """Per-cell minima sum to the assembled model's holdout risk."""
        for seed in range(3):
            train, partition = holdout_fixture(seed, n=80, radius=0.5)
            cfg = TVConfig.from_radius(0.5, d=1, n=80, size_lambda=4, size_gamma=4)
            result = tv_select(train, partition, cfg)
            l = result.split_point
            X_val, y_val = train.X[l:], train.y[l:]
            assignment = partition.assignment[l:]
            preds = np.zeros(len(y_val))
            for j, model in enumerate(result.models):
                inside = assignment == j
                if inside.any():
                    preds[inside] = predict_clipped_many(model, X_val[inside])
            assembled = float(np.mean((y_val - preds) ** 2))
            assert abs(result.holdout_risk_total - assembled) <= 1e-10 * train.n

    def test_per_cell_winner_beats_any_shared_pair(self):
        """Cell-wise minima can only improve on one shared pair."""
        train, partition = holdout_fixture(4, n=80, radius=0.5)
        cfg = TVConfig.from_radius(0.5, d=1, n=80, size_lambda=4, size_gamma=4)
        result = tv_select(train, partition, cfg)
        for a in range(cfg.lambda_net.size):
            for b in range(cfg.gamma_net.size):
                lam, gam = float(cfg.lambda_net[a]), float(cfg.gamma_net[b])
                shared = 0.0
                for sel in result.selections:
                    match = [r for r in sel.evaluations if (r[0], r[1]) == (lam, gam)]
                    shared += match[0][2] if match else sel.risk
                assert result.holdout_risk_total <= shared + 1e-12

    def test_cell_without_training_points_gets_zero_model(self):
        # two far clusters; the second appears only after the split point
        X = np.concatenate([np.zeros((5, 1)), np.ones((3, 1)) * 10.0])
        y = np.concatenate([np.full(5, 0.5), np.full(3, -0.8)])
        train = Dataset(X, y)
        partition = build_partition(X, farthest_first_cover(X, 1.0))
        cfg = TVConfig.from_radius(1.0, d=1, n=8, size_lambda=2, size_gamma=2)
        result = tv_select(train, partition, cfg)
        far_cell = partition.assignment[-1]
        assert result.models[far_cell].is_zero
        assert math.isnan(result.selections[far_cell].lam)
        # the zero model is charged the validation labels it ignores
        n_val = 8 - result.split_point
        expected = float(np.sum(y[result.split_point:][partition.assignment[result.split_point:] == far_cell] ** 2) / n_val)
        assert result.selections[far_cell].risk == pytest.approx(expected, rel=1e-12)

    def test_too_small_dataset_rejected(self):
        train = Dataset(np.zeros((3, 1)), np.zeros(3))
        partition = build_partition(train.X, farthest_first_cover(train.X, 1.0))
        with pytest.raises(ConfigError):
            tv_select(train, partition, TVConfig.from_radius(1.0, d=1, n=3))

    def test_deterministic_across_workers(self):
        train, partition = holdout_fixture(5, n=64, radius=0.4)
        cfg = TVConfig.from_radius(0.4, d=1, n=64, size_lambda=3, size_gamma=3)
        serial = tv_select(train, partition, cfg, workers=1)
        threaded = tv_select(train, partition, cfg, workers=8)
        assert serial.holdout_risk_total == threaded.holdout_risk_total
        for a, b in zip(serial.models, threaded.models):
            assert (a.alpha == b.alpha).all()


class TestTheorySchedule:
    def test_power_of_two_sample_size_is_exact(self):
        radius, lam, gamma = theory_params(TheorySchedule(4096, 1, beta=3.0, alpha_smooth=1.0))
        assert radius == pytest.approx(1.0 / 16.0, rel=1e-12)
        assert lam == pytest.approx(2.0**-16, rel=1e-12)
        assert gamma == pytest.approx(1.0 / 16.0, rel=1e-12)

    def test_constants_scale_linearly(self):
        base = theory_params(TheorySchedule(1000, 2, beta=2.0, alpha_smooth=1.0))
        scaled = theory_params(
            TheorySchedule(1000, 2, beta=2.0, alpha_smooth=1.0, c1=2.0, c2=3.0, c3=0.5)
        )
        assert scaled[0] == pytest.approx(2.0 * base[0], rel=1e-12)
        # lambda folds the radius change through r**d
        assert scaled[1] == pytest.approx(3.0 * 4.0 * base[1], rel=1e-12)
        assert scaled[2] == pytest.approx(0.5 * base[2], rel=1e-12)

    def test_invalid_schedules_rejected(self):
        with pytest.raises(ConfigError):
            TheorySchedule(100, 1, beta=1.0, alpha_smooth=1.0)
        with pytest.raises(ConfigError):
            TheorySchedule(100, 1, beta=2.0, alpha_smooth=0.5)
        with pytest.raises(ConfigError):
            TheorySchedule(100, 1, beta=2.0, alpha_smooth=1.0, c3=2.0, c1=1.0)
        with pytest.raises(ConfigError):
            TheorySchedule(0, 1, beta=2.0, alpha_smooth=1.0)

    def test_warns_when_width_may_exceed_radius(self):
        with pytest.warns(UserWarning, match="width schedule"):
            theory_params(TheorySchedule(100, 1, beta=2.5, alpha_smooth=1.0))

    @given(
        n=st.integers(10, 10**6),
        d=st.integers(1, 5),
        alpha=st.floats(1.0, 3.0),
        margin=st.floats(0.0, 3.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_width_stays_below_radius_on_valid_schedules(self, n, d, alpha, margin):
        """beta >= 2 alpha/d + 1 keeps gamma <= radius for all n."""
        beta = 2.0 * alpha / d + 1.0 + margin
        radius, _, gamma = theory_params(TheorySchedule(n, d, beta=beta, alpha_smooth=alpha))
        assert gamma <= radius * (1 + 1e-12)


class TestTrace:
    def test_trace_csv_lists_every_evaluation(self, tmp_path):
        X, y = random_working_set(10, m=10)
        grid = geometric_grid(10, d=2, size=2)
        sel = kfold_select(X, y, grid, CVConfig(folds=2, seed=0))
        path = tmp_path / "trace.csv"
        write_selection_trace(path, [sel])
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "cell,lambda,gamma,risk"
        assert len(lines) == 1 + 4
        assert all(line.startswith("0,") for line in lines[1:])

    def test_trace_falls_back_to_winner_row(self, tmp_path):
        sel = CellSelection(0.1, 0.5, 0.25)
        path = tmp_path / "trace.csv"
        write_selection_trace(path, [sel, sel])
        lines = path.read_text().strip().splitlines()
        assert lines[1] == "0,0.1,0.5,0.25"
        assert lines[2] == "1,0.1,0.5,0.25"
