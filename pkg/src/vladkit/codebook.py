"""Visual-word dictionary learning: k-means++ seeding plus Lloyd iterations.

Everything here is deterministic given (data, m, max_iters, tol, seed) when
run single-threaded; ties break toward the lowest index throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, TooFewPoints


@dataclass(frozen=True)
class Dictionary:
    centers: np.ndarray  # (M, D)

    @property
    def num_words(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class KmeansReport:
    iterations: int
    objective_trace: tuple[float, ...]
    converged: bool


def squared_distances(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (N, M). Clamped at zero to guard
    against tiny negative values from the expansion formula."""
    d2 = (
        np.sum(data * data, axis=1)[:, None]
        - 2.0 * data @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def kmeans_init_plusplus(data: np.ndarray, m: int, seed: int) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if n < m:
        raise TooFewPoints(f"{n} points < {m} requested centers")
    rng = np.random.default_rng(seed)
    if n == m:
        return data.copy()
    chosen = np.empty(m, dtype=int)
    chosen[0] = rng.integers(n)
    closest = squared_distances(data, data[chosen[0]][None, :])[:, 0]
    for j in range(1, m):
        total = closest.sum()
        if total <= 0.0:
            # All remaining points coincide with a chosen center; pick the
            # lowest-index unchosen point.
            mask = np.ones(n, dtype=bool)
            mask[chosen[:j]] = False
            chosen[j] = int(np.flatnonzero(mask)[0])
        else:
            r = rng.random() * total
            chosen[j] = int(np.searchsorted(np.cumsum(closest), r, side="right"))
        d2 = squared_distances(data, data[chosen[j]][None, :])[:, 0]
        closest = np.minimum(closest, d2)
    return data[chosen].copy()


def kmeans_train(
    data: np.ndarray,
    m: int,
    max_iters: int = 100,
    tol: float = 1e-4,
    seed: int = 0,
) -> tuple[Dictionary, KmeansReport]:
    data = np.asarray(data, dtype=np.float64)
    centers = kmeans_init_plusplus(data, m, seed)
    trace: list[float] = []
    converged = False
    prev = None
    for _ in range(max_iters):
        d2 = squared_distances(data, centers)
        labels = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(len(data)), labels]
        obj = float(point_d2.sum())
        trace.append(obj)
        if prev is not None and (prev == 0.0 or (prev - obj) / prev < tol):
            converged = True
            break
        prev = obj
        new_centers = centers.copy()
        for k in range(m):
            members = labels == k
            if members.any():
                new_centers[k] = data[members].mean(axis=0)
        # Reseed empty clusters at the point farthest from its own center.
        empties = [k for k in range(m) if not (labels == k).any()]
        if empties:
            remaining = point_d2.copy()
            for k in empties:
                far = int(np.argmax(remaining))
                new_centers[k] = data[far]
                remaining[far] = -np.inf
        centers = new_centers
    return Dictionary(centers=centers), KmeansReport(
        iterations=len(trace), objective_trace=tuple(trace), converged=converged
    )


def nearest_center(dictionary: Dictionary, x: np.ndarray) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dictionary.dim,):
        raise DimMismatch(f"descriptor dim {x.shape} != ({dictionary.dim},)")
    d2 = squared_distances(x[None, :], np.asarray(dictionary.centers, dtype=np.float64))
    return int(np.argmin(d2[0]))


def subsample(data: np.ndarray, cap: int, seed: int) -> np.ndarray:
    """Uniform seeded subsample used to bound dictionary training cost."""
    if len(data) <= cap:
        return data
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.permutation(len(data))[:cap])
    return data[idx]
