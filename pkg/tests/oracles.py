"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (double loops, plain formulas, random
search) and never shares code with the library paths it checks.
"""

import math

import numpy as np


def naive_sq_dist(a, b):
    return sum((float(x) - float(y)) ** 2 for x, y in zip(a, b))


def naive_nearest(centers, x):
    best, best_d = 0, math.inf
    for m, center in enumerate(centers):
        d = naive_sq_dist(x, center)
        if d < best_d:
            best, best_d = m, d
    return best


def naive_hard_weights(centers, x):
    w = [0.0] * len(centers)
    w[naive_nearest(centers, x)] = 1.0
    return w


def naive_soft_weights(centers, x, beta):
    # Direct formula; test instances are small enough not to overflow.
    e = [math.exp(-beta * naive_sq_dist(x, c)) for c in centers]
    total = sum(e)
    return [v / total for v in e]


def naive_lsa_weights(centers, x, beta, k):
    d = [(naive_sq_dist(x, c), m) for m, c in enumerate(centers)]
    near = {m for _, m in sorted(d)[:k]}
    e = [
        math.exp(-beta * dist) if m in near else 0.0
        for (dist, m) in ((naive_sq_dist(x, c), m) for m, c in enumerate(centers))
    ]
    total = sum(e)
    return [v / total for v in e]


def llc_objective(centers, x, a, lam, sigma, center_dist=False):
    centers = np.asarray(centers, dtype=float)
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    residual = x - centers.T @ a
    dist = np.sqrt(((centers - x) ** 2).sum(axis=1))
    if center_dist:
        dist = dist - dist.min()
    s = np.exp(dist / sigma)
    return float(residual @ residual + lam * ((s * a) ** 2).sum())


def random_feasible(rng, m, count):
    """Random vectors on the sum-to-one affine plane."""
    z = rng.normal(size=(count, m))
    return z + (1.0 - z.sum(axis=1, keepdims=True)) / m


def naive_vlad(centers, descriptors, weight_fn):
    """Double-loop aggregation: block m += w_m(x) * (x - d_m)."""
    centers = np.asarray(centers, dtype=float)
    m, d = centers.shape
    out = np.zeros((m, d))
    for x in descriptors:
        w = weight_fn(x)
        for j in range(m):
            if w[j] != 0.0:
                out[j] += w[j] * (np.asarray(x, dtype=float) - centers[j])
    return out.reshape(-1)


def best_kmeans_objective(data, m):
    """Exhaustive minimum over all assignments of points to m clusters."""
    import itertools

    data = np.asarray(data, dtype=float)
    n = len(data)
    best = math.inf
    for labels in itertools.product(range(m), repeat=n):
        obj = 0.0
        for k in range(m):
            members = data[[i for i in range(n) if labels[i] == k]]
            if len(members):
                center = members.mean(axis=0)
                obj += float(((members - center) ** 2).sum())
        best = min(best, obj)
    return best
