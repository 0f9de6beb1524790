"""Pure-numpy fallback for the Lloyd iteration kernels.

Mirrors the _core extension's signatures so the two are interchangeable.
Distance blocks are chunked to bound the (rows x k x d) temporary at a few
megabytes regardless of input size.
"""

from __future__ import annotations

import numpy as np

_CHUNK_ELEMENTS = 4_000_000  # rows-per-chunk scaled by k*d


def assign_points(
    points: np.ndarray,
    centroids: np.ndarray,
    labels: np.ndarray,
    min_dist2: np.ndarray,
) -> None:
    k, d = centroids.shape
    rows = max(1, _CHUNK_ELEMENTS // max(1, k * d))
    for start in range(0, points.shape[0], rows):
        stop = min(start + rows, points.shape[0])
        delta = points[start:stop, None, :] - centroids[None, :, :]
        dist2 = np.einsum("ikd,ikd->ik", delta, delta)
        labels[start:stop] = np.argmin(dist2, axis=1)
        min_dist2[start:stop] = np.take_along_axis(
            dist2, labels[start:stop, None], axis=1
        )[:, 0]


def accumulate_clusters(
    points: np.ndarray,
    labels: np.ndarray,
    sums: np.ndarray,
    counts: np.ndarray,
) -> None:
    np.add.at(sums, labels, points)
    counts += np.bincount(labels, minlength=counts.shape[0]).astype(counts.dtype)


def dist2_to_point(points: np.ndarray, center: np.ndarray, out: np.ndarray) -> None:
    delta = points - center
    np.einsum("id,id->i", delta, delta, out=out)
