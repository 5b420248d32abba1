"""Brute-force reference implementations used only by the tests.

Written as plain loops with no shared code path to the package.
"""
import math

import numpy as np


def dist(a, b):
    s = 0.0
    for u, v in zip(a, b):
        s += (float(u) - float(v)) ** 2
    return math.sqrt(s)


def knn_mean_dist(X, k):
    n = len(X)
    out = []
    for i in range(n):
        ds = sorted((dist(X[i], X[j]), j) for j in range(n) if j != i)
        acc = 0.0
        for q in range(k):
            acc += ds[q][0]
        out.append(acc / k)
    return np.array(out)


def neighbor_counts(X, eps):
    n = len(X)
    return np.array([sum(1 for j in range(n) if j != i and dist(X[i], X[j]) <= eps) for i in range(n)])


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def abod_raw(X):
    X = [np.asarray(x, dtype=float) for x in X]
    n = len(X)
    out = []
    for i in range(n):
        vals = []
        others = [j for j in range(n) if j != i and dist(X[i], X[j]) > 0]
        for a in range(len(others)):
            for b in range(a + 1, len(others)):
                u = X[others[a]] - X[i]
                v = X[others[b]] - X[i]
                vals.append(float(u @ v) / (float(u @ u) * float(v @ v)))
        out.append(float(np.var(vals)) if vals else 0.0)
    return np.array(out)


def lloyd(X, init, max_iters=100, tol=1e-6):
    """Unweighted Lloyd iterations; returns the assignment of every iteration."""
    C = np.array(init, dtype=float)
    k = len(C)
    prev = None
    history = []
    for _ in range(max_iters):
        D = np.linalg.norm(X[:, None, :] - C[None, :, :], axis=2)
        a = D.argmin(axis=1)
        counts = np.bincount(a, minlength=k)
        for j in np.flatnonzero(counts == 0):
            own = D[np.arange(len(a)), a]
            cand = [i for i in range(len(a)) if counts[a[i]] > 1]
            i = max(cand, key=lambda t: (own[t], -t))
            counts[a[i]] -= 1
            counts[j] += 1
            a[i] = j
        if prev is not None and np.array_equal(a, prev):
            break
        history.append(a.copy())
        prev = a
        newC = np.array([X[a == j].mean(axis=0) for j in range(k)])
        shift = max(np.linalg.norm(newC[j] - C[j]) for j in range(k))
        C = newC
        if shift < tol:
            break
    return history, C


def weighted_objective(X, w, centers, assign):
    total = 0.0
    for i in range(len(X)):
        c = centers[assign[i]]
        total += w[i] * sum((float(X[i][t]) - float(c[t])) ** 2 for t in range(len(c)))
    return total
