# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the Lloyd iteration hot loop.

Same call signatures as the numpy fallback in _core_py; both fill
caller-allocated output arrays. Ties in the nearest-centroid search go to
the lowest centroid index, matching np.argmin.
"""

from libc.float cimport DBL_MAX


def assign_points(
    double[:, ::1] points,
    double[:, ::1] centroids,
    long long[::1] labels,
    double[::1] min_dist2,
):
    """Nearest centroid per point and the squared distance to it."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t k = centroids.shape[0]
    cdef Py_ssize_t i, j, c, best
    cdef double dist, diff, best_dist
    for i in range(n):
        best = 0
        best_dist = DBL_MAX
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                dist += diff * diff
                if dist >= best_dist:
                    break
            if dist < best_dist:
                best_dist = dist
                best = c
        labels[i] = best
        min_dist2[i] = best_dist


def accumulate_clusters(
    double[:, ::1] points,
    long long[::1] labels,
    double[:, ::1] sums,
    long long[::1] counts,
):
    """Per-cluster component sums and sizes (sums/counts pre-zeroed by caller)."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef long long c
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += points[i, j]


def dist2_to_point(double[:, ::1] points, double[::1] center, double[::1] out):
    """Squared Euclidean distance from every point to one center."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef double dist, diff
    for i in range(n):
        dist = 0.0
        for j in range(d):
            diff = points[i, j] - center[j]
            dist += diff * diff
        out[i] = dist
