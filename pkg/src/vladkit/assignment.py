"""Descriptor-to-word assignment weights.

Five strategies share one output contract: an M-vector of weights summing to
one. Hard assignment is a one-hot at the nearest word; soft assignment is a
softmax of negative squared distances scaled by beta; the localized variant
restricts that softmax to the K nearest words; locality-constrained linear
coding (LLC) solves an affine-constrained least squares with a per-word
locality penalty, and its approximated form solves the unpenalized system
over the K nearest words only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Dictionary, squared_distances
from .errors import BadK, DimMismatch, NonPositiveBeta, SingularSystem

MODES = ("hard", "sa", "lsa", "llc", "llc-approx")

# Soft weights below this are flushed to exact zero and dropped from support.
_FLUSH = 1e-30


@dataclass(frozen=True)
class AssignmentWeights:
    weights: np.ndarray  # (M,)
    support: np.ndarray = field(init=False)  # sorted indices of nonzeros

    def __post_init__(self):
        object.__setattr__(self, "support", np.flatnonzero(self.weights))


@dataclass(frozen=True)
class AssignConfig:
    mode: str = "hard"
    beta: float = 1.0
    k_nn: int = 5
    lam: float = 1e-4
    sigma: float = 1.0
    center_dist: bool = False  # subtract min distance inside the locality adaptor

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown assignment mode {self.mode!r}")


def _distances_sq(dictionary: Dictionary, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dictionary.dim,):
        raise DimMismatch(f"descriptor shape {x.shape} != ({dictionary.dim},)")
    centers = np.asarray(dictionary.centers, dtype=np.float64)
    return squared_distances(x[None, :], centers)[0]


def _softmax_weights(neg_scaled: np.ndarray) -> np.ndarray:
    w = np.exp(neg_scaled - neg_scaled.max())
    w /= w.sum()
    w[w < _FLUSH] = 0.0
    return w / w.sum()


def _k_nearest(d2: np.ndarray, k: int) -> np.ndarray:
    # Stable sort keeps the lowest index first on distance ties.
    return np.argsort(d2, kind="stable")[:k]


def assign_hard(dictionary: Dictionary, x: np.ndarray) -> AssignmentWeights:
    d2 = _distances_sq(dictionary, x)
    w = np.zeros(dictionary.num_words)
    w[int(np.argmin(d2))] = 1.0
    return AssignmentWeights(w)


def assign_soft(dictionary: Dictionary, x: np.ndarray, beta: float) -> AssignmentWeights:
    if beta <= 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    d2 = _distances_sq(dictionary, x)
    return AssignmentWeights(_softmax_weights(-beta * d2))


def assign_localized_soft(
    dictionary: Dictionary, x: np.ndarray, beta: float, k_nn: int
) -> AssignmentWeights:
    if beta <= 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    d2 = _distances_sq(dictionary, x)
    if not 1 <= k_nn <= dictionary.num_words:
        raise BadK(f"k_nn {k_nn} outside [1, {dictionary.num_words}]")
    near = _k_nearest(d2, k_nn)
    w = np.zeros(dictionary.num_words)
    w[near] = _softmax_weights(-beta * d2[near])
    return AssignmentWeights(w)


def _solve_affine_ls(b: np.ndarray, penalty_diag: np.ndarray | None) -> np.ndarray:
    """Minimize ||B^T a||^2 (+ a^T diag(p) a) s.t. sum(a) = 1, where row m of
    B is (d_m - x). Solved via C a~ = 1 then normalization, with a trace-scaled
    ridge added for conditioning."""
    c = b @ b.T
    m = c.shape[0]
    if penalty_diag is not None:
        c = c + np.diag(penalty_diag)
    c = c + (1e-8 * np.trace(c) / m) * np.eye(m)
    try:
        a = np.linalg.solve(c, np.ones(m))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    total = a.sum()
    if not np.isfinite(a).all() or total == 0.0:
        raise SingularSystem("constrained least squares produced no usable solution")
    return a / total


def assign_llc(
    dictionary: Dictionary,
    x: np.ndarray,
    lam: float = 1e-4,
    sigma: float = 1.0,
    center_dist: bool = False,
) -> AssignmentWeights:
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64)
    d2 = _distances_sq(dictionary, x)
    if dictionary.num_words == 1:
        return AssignmentWeights(np.ones(1))
    dist = np.sqrt(d2)
    if center_dist:
        dist = dist - dist.min()
    s = np.exp(dist / sigma)
    b = np.asarray(dictionary.centers, dtype=np.float64) - x
    a = _solve_affine_ls(b, lam * s * s)
    return AssignmentWeights(a)


def assign_llc_approx(
    dictionary: Dictionary, x: np.ndarray, k_nn: int
) -> AssignmentWeights:
    x = np.asarray(x, dtype=np.float64)
    d2 = _distances_sq(dictionary, x)
    if not 1 <= k_nn <= dictionary.num_words:
        raise BadK(f"k_nn {k_nn} outside [1, {dictionary.num_words}]")
    w = np.zeros(dictionary.num_words)
    near = _k_nearest(d2, k_nn)
    if k_nn == 1:
        w[near[0]] = 1.0
        return AssignmentWeights(w)
    b = np.asarray(dictionary.centers, dtype=np.float64)[near] - x
    w[near] = _solve_affine_ls(b, None)
    return AssignmentWeights(w)


def assign(dictionary: Dictionary, x: np.ndarray, config: AssignConfig) -> AssignmentWeights:
    if config.mode == "hard":
        return assign_hard(dictionary, x)
    if config.mode == "sa":
        return assign_soft(dictionary, x, config.beta)
    if config.mode == "lsa":
        return assign_localized_soft(dictionary, x, config.beta, config.k_nn)
    if config.mode == "llc":
        return assign_llc(dictionary, x, config.lam, config.sigma, config.center_dist)
    return assign_llc_approx(dictionary, x, config.k_nn)
