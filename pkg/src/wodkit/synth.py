"""Labelled benchmark: two unit Gaussian blobs plus uniform background noise."""
import numpy as np

from .data import Dataset

CENTERS = ((0.0, 0.0), (6.0, 6.0))
BOX = (-10.0, 16.0)


def make_benchmark(seed=7, n_inliers=950, n_outliers=50):
    """Inliers split evenly between the blobs; outliers uniform on BOX x BOX; rows shuffled."""
    rng = np.random.default_rng(seed)
    sizes = (n_inliers - n_inliers // 2, n_inliers // 2)
    blobs = [rng.standard_normal((m, 2)) + np.asarray(c) for m, c in zip(sizes, CENTERS)]
    noise = rng.uniform(BOX[0], BOX[1], size=(n_outliers, 2))
    X = np.vstack(blobs + [noise])
    y = np.r_[np.zeros(n_inliers, dtype=bool), np.ones(n_outliers, dtype=bool)]
    perm = rng.permutation(X.shape[0])
    return Dataset(
        features=X[perm],
        feature_names=("x0", "x1"),
        row_ids=[str(i) for i in range(X.shape[0])],
        labels=y[perm],
    )
