"""Lloyd k-means with k-means++ initialization, deterministic for a given seed.

The assignment/accumulation inner loops run on the active kernel backend
(compiled or numpy, see kernels.py); the driver here owns initialization,
the empty-cluster rule and convergence. An empty cluster is re-seeded to the
point currently farthest from its assigned centroid, which keeps the
per-iteration inertia sequence non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ClusterError
from . import kernels

__all__ = ["ClusterAssignment", "kmeans"]


@dataclass(frozen=True)
class ClusterAssignment:
    """Result of one k-means run.

    labels[i] is the nearest centroid of point i (ties to the lowest index);
    inertia is the sum of squared distances to assigned centroids;
    inertia_per_iter records the assignment-step inertia of every iteration,
    a non-increasing sequence.
    """

    k: int
    labels: np.ndarray  # int64 (n,)
    centroids: np.ndarray  # float64 (k, d)
    inertia: float
    iterations: int
    seed: int
    inertia_per_iter: tuple[float, ...]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _as_points(points: np.ndarray | list) -> np.ndarray:
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ClusterError(f"points must be a non-empty (n, d) array, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ClusterError("points contain non-finite values")
    return x


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    labels = np.empty(x.shape[0], dtype=np.int64)
    min_dist2 = np.empty(x.shape[0], dtype=np.float64)
    kernels.active.assign_points(x, centroids, labels, min_dist2)
    return labels, min_dist2


def _dist2_to_point(x: np.ndarray, center: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0], dtype=np.float64)
    kernels.active.dist2_to_point(x, np.ascontiguousarray(center), out)
    return out


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Classic k-means++: next center drawn with probability proportional to
    squared distance from the nearest chosen center.

    Seeding runs over a canonical (lexicographic) ordering of the points so
    the chosen center coordinates do not depend on record order; shuffling
    the input then changes nothing but bookkeeping downstream.
    """
    canonical = np.ascontiguousarray(x[np.lexsort(x.T[::-1])])
    n = canonical.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = canonical[first]
    min_dist2 = _dist2_to_point(canonical, centroids[0])
    for c in range(1, k):
        total = float(min_dist2.sum())
        if total <= 0.0:
            # all remaining mass on already-chosen coordinates: pick uniformly
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=min_dist2 / total))
        centroids[c] = canonical[idx]
        np.minimum(min_dist2, _dist2_to_point(canonical, centroids[c]), out=min_dist2)
    return centroids


def kmeans(
    points: np.ndarray | list,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Cluster points into k groups; converged when the largest centroid
    movement (Euclidean) drops below tol or max_iter is reached."""
    x = _as_points(points)
    n, d = x.shape
    if k < 1:
        raise ClusterError(f"k must be >= 1, got {k}")
    if k > n:
        raise ClusterError(f"k={k} exceeds the number of points ({n})")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(x, k, rng)

    inertia_history: list[float] = []
    iterations = 0
    sums = np.empty((k, d), dtype=np.float64)
    counts = np.empty(k, dtype=np.int64)

    while iterations < max_iter:
        labels, min_dist2 = _assign(x, centroids)
        inertia_history.append(float(min_dist2.sum()))

        sums[:] = 0.0
        counts[:] = 0
        kernels.active.accumulate_clusters(x, labels, sums, counts)

        new_centroids = centroids.copy()
        occupied = counts > 0
        new_centroids[occupied] = sums[occupied] / counts[occupied, None]
        empty = np.flatnonzero(~occupied)
        if empty.size:
            # farthest points from their assigned centroids, one per empty slot
            order = np.argsort(-min_dist2, kind="stable")
            for slot, cluster in enumerate(empty):
                new_centroids[cluster] = x[order[slot % n]]

        shift2 = float(((new_centroids - centroids) ** 2).sum(axis=1).max())
        centroids = new_centroids
        iterations += 1
        if shift2 < tol * tol:
            break

    # final assignment so labels and inertia match the returned centroids
    labels, min_dist2 = _assign(x, centroids)
    inertia = float(min_dist2.sum())
    inertia_history.append(inertia)

    return ClusterAssignment(
        k=k,
        labels=labels,
        centroids=centroids,
        inertia=inertia,
        iterations=iterations,
        seed=seed,
        inertia_per_iter=tuple(inertia_history),
    )
