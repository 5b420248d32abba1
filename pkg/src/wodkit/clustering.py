"""Weighted k-means with weight-biased k-means++ seeding.

Assignment is by distance alone (Euclidean, or per-cluster Mahalanobis in
``metric="mahalanobis"`` mode); weights enter the seeding probabilities and
the centroid and covariance updates. Covariances are recomputed every
iteration and carry a ridge term so they stay positive definite.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .errors import ConfigError, DataError, NumericError

METRICS = ("euclidean", "mahalanobis")


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 2
    seed: int = 0
    max_iters: int = 100
    tol: float = 1e-6
    ridge: float = 1e-6
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"cluster.k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ConfigError(f"cluster.max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ConfigError(f"cluster.tol must be > 0, got {self.tol}")
        if not self.ridge > 0:
            raise ConfigError(f"cluster.ridge must be > 0, got {self.ridge}")
        if self.metric not in METRICS:
            raise ConfigError(f"cluster.metric must be one of {METRICS}, got {self.metric!r}")


@dataclass
class ClusterModel:
    k: int
    centers: np.ndarray
    covariances: np.ndarray
    assignments: np.ndarray
    cluster_mass: np.ndarray
    iterations: int
    converged: bool
    metric_mode: str = "euclidean"
    objective_history: list = field(default_factory=list)
    assignment_history: list = None

    @property
    def d(self):
        return self.centers.shape[1]

    def cholesky(self):
        if getattr(self, "_chol", None) is None:
            self._chol = _cholesky_all(self.covariances)
        return self._chol

    def assign(self, X):
        """Nearest center under the model's metric; returns (labels, squared distances)."""
        X = _features(X)
        if X.shape[1] != self.d:
            raise DataError(f"model has {self.d} features, data has {X.shape[1]}")
        D2 = _assign_dists(X, self.centers, self.cholesky(), self.metric_mode)
        return np.argmin(D2, axis=1), D2

    def to_dict(self):
        return {
            "k": self.k,
            "metric_mode": self.metric_mode,
            "centers": self.centers.tolist(),
            "covariances": self.covariances.tolist(),
            "cluster_mass": self.cluster_mass.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            centers = np.asarray(doc["centers"], dtype=np.float64)
            covs = np.asarray(doc["covariances"], dtype=np.float64)
            k = int(doc["k"])
            model = cls(
                k=k,
                centers=centers,
                covariances=covs,
                assignments=np.zeros(0, dtype=np.int64),
                cluster_mass=np.asarray(doc["cluster_mass"], dtype=np.float64),
                iterations=int(doc["iterations"]),
                converged=bool(doc["converged"]),
                metric_mode=doc["metric_mode"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"corrupt cluster model: {exc}") from None
        d = centers.shape[1] if centers.ndim == 2 else -1
        if centers.shape != (k, d) or covs.shape != (k, d, d) or model.metric_mode not in METRICS:
            raise DataError("corrupt cluster model: inconsistent shapes or metric")
        return model


def _features(d):
    X = getattr(d, "features", d)
    return np.asarray(X, dtype=np.float64)


def _cholesky_all(covs):
    try:
        return np.stack([np.linalg.cholesky(c) for c in covs])
    except np.linalg.LinAlgError:
        raise NumericError("covariance not positive definite; increase cluster.ridge", "cluster") from None


def mahalanobis_sq_to(X, center, chol):
    """Squared Mahalanobis distance of each row of X given a Cholesky factor."""
    z = solve_triangular(chol, (X - center).T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", z, z)


def _assign_dists(X, centers, chol, metric):
    if metric == "euclidean":
        return kernels.sq_dists_to_centers(X, centers)
    return np.stack([mahalanobis_sq_to(X, centers[j], chol[j]) for j in range(len(centers))], axis=1)


def _draw(rng, p):
    c = np.cumsum(p)
    idx = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    if idx >= len(p):
        idx = int(np.flatnonzero(p > 0)[-1])
    return idx


def kmeanspp_init(d, w, k, seed):
    """k-means++ seeding with sampling probabilities scaled by the weights."""
    X = _features(d)
    w = np.asarray(w, dtype=np.float64)
    n = X.shape[0]
    distinct = np.unique(X, axis=0).shape[0]
    if k > distinct:
        raise DataError(f"k={k} exceeds the number of distinct rows ({distinct})")
    rng = np.random.default_rng(seed)
    chosen = [_draw(rng, w)]
    D2 = kernels.sq_dists_to_centers(X, X[chosen[0]][None])[:, 0]
    for _ in range(1, k):
        p = w * D2
        if not p.sum() > 0:
            raise NumericError("k-means++ ran out of sampling mass", "cluster")
        nxt = _draw(rng, p)
        chosen.append(nxt)
        D2 = np.minimum(D2, kernels.sq_dists_to_centers(X, X[nxt][None])[:, 0])
    return X[chosen].copy()


def _repair_empty(assign, D2, w, k):
    """Move the point with the largest weighted distance into each empty cluster."""
    counts = np.bincount(assign, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return assign
    assign = assign.copy()
    own = np.sqrt(D2[np.arange(len(assign)), assign]) * w
    moved = np.zeros(len(assign), dtype=bool)
    for j in empty:
        cand = (counts[assign] > 1) & ~moved
        if not cand.any():
            raise NumericError("cannot repair empty cluster", "cluster")
        i = int(np.argmax(np.where(cand, own, -np.inf)))
        counts[assign[i]] -= 1
        counts[j] += 1
        assign[i] = j
        moved[i] = True
    return assign


def _update(X, w, assign, k, ridge):
    d = X.shape[1]
    centers = np.empty((k, d))
    covs = np.empty((k, d, d))
    mass = np.empty(k)
    eye = np.eye(d)
    for j in range(k):
        m = assign == j
        Xm, wm = X[m], w[m]
        total = wm.sum()
        c = (wm[:, None] * Xm).sum(axis=0) / total
        diff = Xm - c
        cov = (wm[:, None] * diff).T @ diff / total
        centers[j] = c
        covs[j] = 0.5 * (cov + cov.T) + ridge * eye
        mass[j] = total
    return centers, covs, mass


def weighted_objective(d, w, model):
    """Sum of w_i times the squared Euclidean distance to the assigned center."""
    X = _features(d)
    if X.shape[1] != model.centers.shape[1] or X.shape[0] != len(model.assignments):
        raise DataError("objective: data and model dimensions do not match")
    diff = X - model.centers[model.assignments]
    return float(np.dot(np.asarray(w, dtype=np.float64), np.einsum("ij,ij->i", diff, diff)))


def weighted_kmeans(d, w, cfg, init_centers=None, record_history=False):
    """Fit a ClusterModel.

    Stops when the assignment is unchanged between iterations, when no
    center moves by ``cfg.tol`` or more, or after ``cfg.max_iters``
    assignment steps.
    """
    X = _features(d)
    w = np.asarray(w, dtype=np.float64)
    n, dim = X.shape
    if w.shape != (n,):
        raise DataError(f"{w.shape[0]} weights for {n} rows")
    k = cfg.k
    centers = kmeanspp_init(X, w, k, cfg.seed) if init_centers is None else np.array(init_centers, dtype=np.float64)
    if centers.shape != (k, dim):
        raise DataError(f"initial centers must have shape {(k, dim)}, got {centers.shape}")
    # identity until the first update, so the first assignment is Euclidean
    covs = np.repeat(np.eye(dim)[None], k, axis=0)
    chol = _cholesky_all(covs)
    assign = None
    mass = None
    objective, history = [], [] if record_history else None
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        D2 = _assign_dists(X, centers, chol, cfg.metric)
        new = _repair_empty(np.argmin(D2, axis=1), D2, w, k)
        if assign is not None and np.array_equal(new, assign):
            converged = True
            break
        assign = new
        if record_history:
            history.append(assign.copy())
        new_centers, covs, mass = _update(X, w, assign, k, cfg.ridge)
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        chol = _cholesky_all(covs)
        diff = X - centers[assign]
        objective.append(float(np.dot(w, np.einsum("ij,ij->i", diff, diff))))
        if shift < cfg.tol:
            converged = True
            break
    if not np.all(np.isfinite(centers)):
        raise NumericError("non-finite cluster centers", "cluster")
    model = ClusterModel(
        k=k,
        centers=centers,
        covariances=covs,
        assignments=assign,
        cluster_mass=mass,
        iterations=it,
        converged=converged,
        metric_mode=cfg.metric,
        objective_history=objective,
        assignment_history=history,
    )
    model._chol = chol
    return model
