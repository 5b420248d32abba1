"""Per-instance weights.

Convention: a high weight means the instance is typical (frequent pattern,
dense neighbourhood), a low weight means it is rare. Every scheme returns
weights rescaled to mean 1, so uniform weighting is exactly all-ones.
"""
import numpy as np

from . import kernels
from .errors import DataError

SCHEMES = ("uniform", "pattern_frequency", "knn_distance")


def normalize_weights(w):
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DataError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DataError("weights must be positive and finite")
    return w * (w.size / w.sum())


def uniform_weights(n):
    if n < 1:
        raise DataError("uniform_weights needs n >= 1")
    return np.ones(n)


def pattern_keys(X, bins):
    """Equal-width bin index of every cell; the row of indices is its pattern.

    Bins span [min, max] of each feature with the max landing in the top
    bin. A constant feature puts every row in bin 0.
    """
    X = np.asarray(X, dtype=np.float64)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    idx = np.floor((X - lo) / safe * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    idx[:, span == 0] = 0
    return idx


def pattern_frequency_weights(ds, bins=8, raw=False):
    """Weight of row i = share of rows with the same binned pattern."""
    if bins < 2:
        raise DataError(f"bins must be >= 2, got {bins}")
    keys = pattern_keys(ds.features, bins)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    w = counts[inverse.ravel()] / ds.n
    return w if raw else normalize_weights(w)


def knn_distance_weights(ds, k=5, raw=False):
    """1 / (1 + mean distance to the k nearest other rows)."""
    if not 1 <= k <= ds.n - 1:
        raise DataError(f"knn weighting needs 1 <= k <= n-1 (n={ds.n}), got k={k}")
    w = 1.0 / (1.0 + kernels.knn_mean_dist(ds.features, k))
    return w if raw else normalize_weights(w)


def compute_weights(ds, scheme="uniform", bins=8, k=5):
    if scheme == "uniform":
        return uniform_weights(ds.n)
    if scheme == "pattern_frequency":
        return pattern_frequency_weights(ds, bins)
    if scheme == "knn_distance":
        return knn_distance_weights(ds, k)
    raise DataError(f"unknown weighting scheme {scheme!r}")
