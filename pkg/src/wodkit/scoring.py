"""Outlier scores: weighted Mahalanobis, eps/min_pts density, angle variance.

All scores are non-negative and larger means more anomalous.
"""
import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .clustering import _features, mahalanobis_sq_to
from .errors import DataError, NumericError

METHODS = ("weighted_mahalanobis", "density", "abod")


def mahalanobis_distance(x, center, cov):
    """sqrt((x - c)^T cov^-1 (x - c)) via a Cholesky solve."""
    x = np.asarray(x, dtype=np.float64)
    diff = x - np.asarray(center, dtype=np.float64)
    try:
        L = np.linalg.cholesky(np.asarray(cov, dtype=np.float64))
    except np.linalg.LinAlgError:
        raise NumericError("covariance is not positive definite", "score") from None
    z = solve_triangular(L, diff, lower=True, check_finite=False)
    return float(np.sqrt(z @ z))


def mahalanobis_to_nearest(d, model):
    """Mahalanobis distance of each row to its nearest center (under the model metric)."""
    X = _features(d)
    labels, D2 = model.assign(X)
    if model.metric_mode == "mahalanobis":
        m2 = D2[np.arange(len(labels)), labels]
    else:
        chol = model.cholesky()
        m2 = np.empty(X.shape[0])
        for j in range(model.k):
            rows = labels == j
            if rows.any():
                m2[rows] = mahalanobis_sq_to(X[rows], model.centers[j], chol[j])
    return np.sqrt(np.maximum(m2, 0.0)), labels


def score(d, w, model):
    """s_i = Mahalanobis distance to the nearest center divided by w_i."""
    w = np.asarray(w, dtype=np.float64)
    dist, _ = mahalanobis_to_nearest(d, model)
    if w.shape != dist.shape:
        raise DataError(f"{w.size} weights for {dist.size} rows")
    s = dist / w
    if not np.all(np.isfinite(s)):
        raise NumericError("non-finite outlier scores", "score")
    return s


def neighbor_counts(d, eps):
    if not eps > 0:
        raise DataError(f"eps must be > 0, got {eps}")
    return kernels.neighbor_counts(_features(d), eps)


def density_flags(d, eps, min_pts):
    """True where fewer than ``min_pts`` other rows lie within ``eps`` (inclusive)."""
    return neighbor_counts(d, eps) < min_pts


def density_scores(counts):
    # monotone decreasing in the neighbour count, so sparser rows rank higher
    return 1.0 / (1.0 + np.asarray(counts, dtype=np.float64))


def abod_raw(d):
    X = _features(d)
    if X.shape[0] < 3:
        raise DataError("angle-based scoring needs at least 3 rows")
    return kernels.abod_raw(X)


def abod_score(d):
    """Negated angle variance shifted so the minimum is 0."""
    raw = abod_raw(d)
    return raw.max() - raw
