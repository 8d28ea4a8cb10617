"""Farthest-first covers and nearest-center Voronoi partitions.

A cover is built by farthest-first traversal: starting from one point,
repeatedly promote the point farthest from all current centers until
every point lies within the target radius of some center.  This yields
centers that are pairwise more than the radius apart while covering the
whole sample.  Points are then assigned to their nearest center, ties
going to the center with the smaller index, which makes the cells a
genuine partition.

All distance comparisons use squared Euclidean distances against the
squared radius, so tie handling is exact whenever coordinates make the
squares equal in floating point.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DimensionMismatchError
from .rng import derive_rng

# cap on the number of scratch floats per distance block, to keep the
# point-times-center matrices out of memory for large assignments
_BLOCK_ELEMENTS = 4_000_000


@dataclass
class Cover:
    """Centers plus the radius they were built for."""

    centers: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ConfigError(f"cover radius must be positive and finite, got {self.radius}")
        if self.centers.shape[0] == 0:
            raise ConfigError("a cover needs at least one center")

    @property
    def m(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]


@dataclass
class VoronoiPartition:
    """Cell index per point, with the cells' member lists."""

    assignment: np.ndarray
    num_cells: int

    def __post_init__(self) -> None:
        self.assignment = np.asarray(self.assignment, dtype=np.intp)

    @property
    def cells(self) -> list[np.ndarray]:
        """Member indices per cell, ascending; empty cells allowed."""
        return [np.flatnonzero(self.assignment == j) for j in range(self.num_cells)]

    def cell_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_cells)


def farthest_first_cover(points: np.ndarray, radius: float, seed: int | None = None) -> Cover:
    """Build a cover of the points by farthest-first traversal.

    The first center is the first point, or a seeded uniform draw when
    ``seed`` is given.  Among equally far candidates the one with the
    smallest index is promoted.  Every input point ends up within
    ``radius`` of some center and centers are pairwise farther than
    ``radius`` apart.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    if n == 0:
        raise ConfigError("cannot cover an empty point set")
    if not np.isfinite(radius) or radius <= 0:
        raise ConfigError(f"cover radius must be positive and finite, got {radius}")

    first = 0 if seed is None else int(derive_rng(seed, "cover").integers(n))
    center_idx = [first]
    sq_mindist = cdist(points, points[first:first + 1], "sqeuclidean")[:, 0]
    sq_radius = radius * radius
    while True:
        candidate = int(np.argmax(sq_mindist))
        if sq_mindist[candidate] <= sq_radius:
            break
        center_idx.append(candidate)
        sq_new = cdist(points, points[candidate:candidate + 1], "sqeuclidean")[:, 0]
        np.minimum(sq_mindist, sq_new, out=sq_mindist)
    return Cover(points[np.asarray(center_idx)], float(radius))


def assign_voronoi(points: np.ndarray, cover: Cover) -> np.ndarray:
    """Nearest-center index per point, ties to the smaller index."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != cover.d:
        raise DimensionMismatchError(
            f"points have dimension {points.shape[1]}, cover has {cover.d}"
        )
    n = points.shape[0]
    out = np.empty(n, dtype=np.intp)
    block = max(1, _BLOCK_ELEMENTS // max(1, cover.m))
    for start in range(0, n, block):
        stop = min(n, start + block)
        sq = cdist(points[start:stop], cover.centers, "sqeuclidean")
        out[start:stop] = np.argmin(sq, axis=1)
    return out


def build_partition(points: np.ndarray, cover: Cover) -> VoronoiPartition:
    return VoronoiPartition(assign_voronoi(points, cover), cover.m)


def cell_of(x: np.ndarray, cover: Cover) -> int:
    """Cell index of a single query point."""
    return int(assign_voronoi(np.atleast_2d(x), cover)[0])


def write_partition_csv(path, partition: VoronoiPartition) -> None:
    with open(path, "w", encoding="utf8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_index", "cell_index"])
        for i, j in enumerate(partition.assignment):
            writer.writerow([i, int(j)])


def write_cover_csv(path, cover: Cover) -> None:
    with open(path, "w", encoding="utf8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(cover.d)] + ["radius"])
        for center in cover.centers:
            writer.writerow([repr(float(v)) for v in center] + [repr(float(cover.radius))])
