import numpy as np
import pytest

import oracles
from wodkit import kernels


@pytest.mark.parametrize("seed", range(5))
def test_knn_mean_dist_matches_bruteforce(backend, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    X[7] = X[3]  # a duplicate pair
    for k in (1, 4, 49):
        np.testing.assert_array_equal(kernels.knn_mean_dist(X, k), oracles.knn_mean_dist(X, k))


@pytest.mark.parametrize("seed", range(5))
def test_neighbor_counts_match_bruteforce(backend, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(60, 2)).astype(float)  # lattice points put many pairs on the boundary
    for eps in (0.5, 1.0, np.sqrt(2.0), 3.0):
        np.testing.assert_array_equal(kernels.neighbor_counts(X, eps), oracles.neighbor_counts(X, eps))


def test_sq_dists_to_centers(backend, rng):
    X = rng.normal(size=(40, 5))
    C = rng.normal(size=(3, 5))
    expect = ((X[:, None, :] - C[None]) ** 2).sum(axis=2)
    np.testing.assert_allclose(kernels.sq_dists_to_centers(X, C), expect, rtol=1e-12)


def test_abod_raw_matches_direct(backend, rng):
    X = rng.normal(size=(15, 2))
    X[4] = X[9]
    np.testing.assert_allclose(kernels.abod_raw(X), oracles.abod_raw(X), rtol=1e-9, atol=1e-12)


@pytest.mark.skipif(not kernels._accel.HAVE_NUMBA, reason="numba not installed")
def test_backends_agree(rng):
    X = rng.normal(size=(120, 4))
    C = X[:3].copy()
    for name, args in [("knn_mean_dist", (X, 5)), ("neighbor_counts", (X, 1.2)),
                       ("sq_dists_to_centers", (X, C)), ("abod_raw", (X[:30],))]:
        a = kernels.NUMBA_KERNELS[name](*args)
        b = kernels.NUMPY_KERNELS[name](*args)
        if name == "abod_raw":
            np.testing.assert_allclose(a, b, rtol=1e-9)
        else:
            np.testing.assert_array_equal(a, b)
