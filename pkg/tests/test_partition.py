"""Cover construction and Voronoi assignment invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_array_equal
from scipy.spatial.distance import cdist

from locsvm.errors import ConfigError, DimensionMismatchError
from locsvm.partition import (
    Cover,
    assign_voronoi,
    build_partition,
    cell_of,
    farthest_first_cover,
    write_cover_csv,
    write_partition_csv,
)


def random_points(seed: int, n: int, d: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, d))


class TestFarthestFirst:
    def test_hand_traced_example(self):
        """Points 0, 1, 3 with radius 1.5 promote exactly 0 and 3."""
        points = np.array([[0.0], [1.0], [3.0]])
        cover = farthest_first_cover(points, 1.5)
        assert_array_equal(cover.centers, [[0.0], [3.0]])

    def test_radius_at_least_diameter_gives_one_center(self):
        points = random_points(0, 40, 2)
        diameter = cdist(points, points).max()
        cover = farthest_first_cover(points, diameter * 1.01)
        assert cover.m == 1
        assert_array_equal(cover.centers[0], points[0])

    def test_radius_below_separation_promotes_every_point(self):
        points = np.array([[0.0], [1.0], [2.0], [3.0]])
        cover = farthest_first_cover(points, 0.5)
        assert cover.m == 4

    def test_first_center_is_first_point_by_default(self):
        points = random_points(1, 30, 3)
        cover = farthest_first_cover(points, 0.8)
        assert_array_equal(cover.centers[0], points[0])

    def test_seeded_start_is_deterministic(self):
        points = random_points(2, 30, 2)
        c1 = farthest_first_cover(points, 0.7, seed=5)
        c2 = farthest_first_cover(points, 0.7, seed=5)
        assert_array_equal(c1.centers, c2.centers)

    def test_empty_input_rejected(self):
        with pytest.raises(ConfigError):
            farthest_first_cover(np.zeros((0, 2)), 1.0)

    @pytest.mark.parametrize("radius", [0.0, -1.0, float("inf"), float("nan")])
    def test_bad_radius_rejected(self, radius):
        with pytest.raises(ConfigError):
            farthest_first_cover(np.zeros((3, 1)), radius)

    @given(
        seed=st.integers(0, 2**20),
        n=st.integers(1, 60),
        d=st.integers(1, 3),
        radius=st.floats(0.05, 3.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_cover_invariants(self, seed, n, d, radius):
        """Coverage within r and pairwise center separation beyond r."""
        points = random_points(seed, n, d)
        cover = farthest_first_cover(points, radius)
        dist_to_centers = cdist(points, cover.centers, "sqeuclidean")
        assert (dist_to_centers.min(axis=1) <= radius**2 + 1e-15).all()
        if cover.m > 1:
            between = cdist(cover.centers, cover.centers, "sqeuclidean")
            between[np.diag_indices(cover.m)] = np.inf
            assert (between.min() > radius**2).all()


class TestAssignment:
    def test_hand_traced_assignment(self):
        points = np.array([[0.0], [1.0], [3.0]])
        cover = Cover(np.array([[0.0], [3.0]]), 1.5)
        assert_array_equal(assign_voronoi(points, cover), [0, 0, 1])

    def test_tie_resolves_to_smaller_index(self):
        """Equidistant points join the cell with the smaller index."""
        cover = Cover(np.array([[0.0], [3.0]]), 2.0)
        midpoint = np.array([[1.5]])
        assert assign_voronoi(midpoint, cover)[0] == 0
        three_way = Cover(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]), 2.0)
        assert assign_voronoi(np.array([[0.0, 0.0]]), three_way)[0] == 0

    def test_cell_of_single_point(self):
        cover = Cover(np.array([[0.0], [3.0]]), 1.5)
        assert cell_of(np.array([2.9]), cover) == 1

    def test_dimension_mismatch_rejected(self):
        cover = Cover(np.array([[0.0, 0.0]]), 1.0)
        with pytest.raises(DimensionMismatchError):
            assign_voronoi(np.zeros((2, 3)), cover)

    @given(seed=st.integers(0, 2**20), n=st.integers(1, 80), radius=st.floats(0.05, 2.0))
    @settings(max_examples=50, deadline=None)
    def test_partition_covers_every_point_once(self, seed, n, radius):
        """Each point lands in exactly one cell, and in the nearest one."""
        points = random_points(seed, n, 2)
        cover = farthest_first_cover(points, radius)
        partition = build_partition(points, cover)
        assert partition.assignment.shape == (n,)
        sizes = partition.cell_sizes()
        assert sizes.sum() == n
        concatenated = np.sort(np.concatenate(partition.cells)) if cover.m else []
        assert_array_equal(concatenated, np.arange(n))
        sq = cdist(points, cover.centers, "sqeuclidean")
        chosen = sq[np.arange(n), partition.assignment]
        assert (chosen <= sq.min(axis=1)).all()

    def test_chunked_assignment_matches_direct(self, monkeypatch):
        """Blockwise assignment is identical to one-shot assignment."""
        import locsvm.partition as mod

        points = random_points(3, 500, 2)
        cover = farthest_first_cover(points, 0.5)
        direct = assign_voronoi(points, cover)
        monkeypatch.setattr(mod, "_BLOCK_ELEMENTS", 64)
        blocked = assign_voronoi(points, cover)
        assert_array_equal(direct, blocked)


class TestExports:
    def test_partition_csv(self, tmp_path):
        points = np.array([[0.0], [1.0], [3.0]])
        cover = farthest_first_cover(points, 1.5)
        partition = build_partition(points, cover)
        path = tmp_path / "partition.csv"
        write_partition_csv(path, partition)
        lines = path.read_text().splitlines()
        assert lines[0] == "point_index,cell_index"
        assert lines[1:] == ["0,0", "1,0", "2,1"]

    def test_cover_csv(self, tmp_path):
        cover = Cover(np.array([[0.0, 1.0], [2.0, 3.0]]), 1.5)
        path = tmp_path / "cover.csv"
        write_cover_csv(path, cover)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,x2,radius"
        assert len(lines) == 3
