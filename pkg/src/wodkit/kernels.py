"""Hot numeric kernels, each in a numba and a numpy flavour.

The public names at the bottom dispatch on ``_accel.USE_NUMBA``. Both
flavours accumulate squared coordinate differences in feature order, so
the distance-based kernels agree bit-for-bit with a plain Python loop.
"""
import numpy as np

from . import _accel
from ._accel import njit

_CHUNK = 512


# -- squared distances to a small set of centers ---------------------------

@njit
def _sq_dists_to_centers_nb(X, C):
    n, d = X.shape
    k = C.shape[0]
    out = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            s = 0.0
            for t in range(d):
                diff = X[i, t] - C[j, t]
                s += diff * diff
            out[i, j] = s
    return out


def _sq_dists_to_centers_np(X, C):
    out = np.zeros((X.shape[0], C.shape[0]))
    for t in range(X.shape[1]):
        diff = X[:, t, None] - C[None, :, t]
        out += diff * diff
    return out


# -- mean distance to the k nearest neighbours (self excluded) -------------

@njit
def _knn_mean_dist_nb(X, k):
    n, d = X.shape
    out = np.empty(n)
    row = np.empty(n - 1)
    for i in range(n):
        m = 0
        for j in range(n):
            if j == i:
                continue
            s = 0.0
            for t in range(d):
                diff = X[i, t] - X[j, t]
                s += diff * diff
            row[m] = np.sqrt(s)
            m += 1
        srt = np.sort(np.partition(row, k - 1)[:k])
        acc = 0.0
        for q in range(k):
            acc += srt[q]
        out[i] = acc / k
    return out


def _pairwise_dist_rows(X, start, stop):
    block = np.zeros((stop - start, X.shape[0]))
    for t in range(X.shape[1]):
        diff = X[start:stop, t, None] - X[None, :, t]
        block += diff * diff
    return np.sqrt(block)


def _knn_mean_dist_np(X, k):
    n = X.shape[0]
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        D = _pairwise_dist_rows(X, start, stop)
        D[np.arange(stop - start), np.arange(start, stop)] = np.inf
        part = np.sort(np.partition(D, k - 1, axis=1)[:, :k], axis=1)
        # cumsum keeps the left-to-right summation order
        out[start:stop] = np.cumsum(part, axis=1)[:, -1] / k
    return out


# -- eps-neighbourhood counts (self excluded, inclusive boundary) ----------

@njit
def _neighbor_counts_nb(X, eps):
    n, d = X.shape
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        c = 0
        for j in range(n):
            if j == i:
                continue
            s = 0.0
            for t in range(d):
                diff = X[i, t] - X[j, t]
                s += diff * diff
            if np.sqrt(s) <= eps:
                c += 1
        out[i] = c
    return out


def _neighbor_counts_np(X, eps):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        D = _pairwise_dist_rows(X, start, stop)
        out[start:stop] = (D <= eps).sum(axis=1) - 1
    return out


# -- angle-based outlier factor: variance of distance-weighted cosines -----

@njit
def _abod_raw_nb(X):
    n, d = X.shape
    out = np.zeros(n)
    diffs = np.empty((n, d))
    norms = np.empty(n)
    for i in range(n):
        m = 0
        for j in range(n):
            if j == i:
                continue
            s = 0.0
            for t in range(d):
                v = X[j, t] - X[i, t]
                diffs[m, t] = v
                s += v * v
            if s > 0.0:
                norms[m] = s
                m += 1
        if m < 2:
            continue
        npairs = m * (m - 1) // 2
        total = 0.0
        for a in range(m):
            for b in range(a + 1, m):
                dot = 0.0
                for t in range(d):
                    dot += diffs[a, t] * diffs[b, t]
                total += dot / (norms[a] * norms[b])
        mean = total / npairs
        ss = 0.0
        for a in range(m):
            for b in range(a + 1, m):
                dot = 0.0
                for t in range(d):
                    dot += diffs[a, t] * diffs[b, t]
                dev = dot / (norms[a] * norms[b]) - mean
                ss += dev * dev
        out[i] = ss / npairs
    return out


def _abod_raw_np(X):
    n = X.shape[0]
    out = np.zeros(n)
    for i in range(n):
        D = np.delete(X, i, axis=0) - X[i]
        sq = np.einsum("ij,ij->i", D, D)
        keep = sq > 0.0
        D, sq = D[keep], sq[keep]
        m = D.shape[0]
        if m < 2:
            continue
        vals = (D @ D.T) / np.outer(sq, sq)
        out[i] = vals[np.triu_indices(m, 1)].var()
    return out


def _as_f64(X):
    return np.ascontiguousarray(X, dtype=np.float64)


def sq_dists_to_centers(X, C):
    """(n, k) matrix of squared Euclidean distances."""
    fn = _sq_dists_to_centers_nb if _accel.USE_NUMBA else _sq_dists_to_centers_np
    return fn(_as_f64(X), _as_f64(C))


def knn_mean_dist(X, k):
    fn = _knn_mean_dist_nb if _accel.USE_NUMBA else _knn_mean_dist_np
    return fn(_as_f64(X), int(k))


def neighbor_counts(X, eps):
    fn = _neighbor_counts_nb if _accel.USE_NUMBA else _neighbor_counts_np
    return fn(_as_f64(X), float(eps))


def abod_raw(X):
    fn = _abod_raw_nb if _accel.USE_NUMBA else _abod_raw_np
    return fn(_as_f64(X))


NUMBA_KERNELS = {
    "sq_dists_to_centers": _sq_dists_to_centers_nb,
    "knn_mean_dist": _knn_mean_dist_nb,
    "neighbor_counts": _neighbor_counts_nb,
    "abod_raw": _abod_raw_nb,
}
NUMPY_KERNELS = {
    "sq_dists_to_centers": _sq_dists_to_centers_np,
    "knn_mean_dist": _knn_mean_dist_np,
    "neighbor_counts": _neighbor_counts_np,
    "abod_raw": _abod_raw_np,
}
