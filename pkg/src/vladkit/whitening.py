"""PCA whitening of local descriptors, followed by per-descriptor L2
normalization. The projection rows are principal axes scaled by
1/sqrt(eigenvalue + epsilon), sorted by descending eigenvalue."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimMismatch, DimTooLarge, NonFinite


@dataclass(frozen=True)
class WhiteningTransform:
    mean: np.ndarray        # (D_in,)
    projection: np.ndarray  # (D_out, D_in)
    epsilon: float

    @property
    def input_dim(self) -> int:
        return self.mean.size

    @property
    def output_dim(self) -> int:
        return self.projection.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Center and project without the final L2 step. Accepts a single
        descriptor or an (N, D_in) batch."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise DimMismatch(
                f"descriptor dim {x.shape[-1]} != transform input {self.input_dim}"
            )
        return (x - self.mean) @ self.projection.T


def default_epsilon(descriptors: np.ndarray) -> float:
    x = np.asarray(descriptors, dtype=np.float64)
    centered = x - x.mean(axis=0)
    total_var = float(np.sum(centered * centered) / x.shape[0])
    return 1e-6 * total_var / x.shape[1]


def fit_whitening(
    descriptors: np.ndarray,
    output_dim: int | None = None,
    epsilon: float | None = None,
) -> WhiteningTransform:
    x = np.asarray(descriptors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DegenerateInput("need at least 2 descriptors to fit whitening")
    n, d_in = x.shape
    if output_dim is None:
        output_dim = min(d_in, n - 1)
    if output_dim < 1 or output_dim > min(n - 1, d_in):
        raise DimTooLarge(
            f"output_dim {output_dim} exceeds min(N-1, D_in) = {min(n - 1, d_in)}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / n
    if epsilon is None:
        epsilon = 1e-6 * float(np.trace(cov)) / d_in
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1][:output_dim]
    eigvals = np.maximum(eigvals[order], 0.0)
    axes = eigvecs[:, order].T  # rows = principal axes, descending eigenvalue
    # Deterministic sign: largest-magnitude entry of each axis is positive.
    for row in axes:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    projection = axes / np.sqrt(eigvals + epsilon)[:, None]
    return WhiteningTransform(mean=mean, projection=projection, epsilon=float(epsilon))


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """v / ||v||_2, leaving the zero vector unchanged."""
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v.copy()
    return v / norm


def l2_normalize_rows(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return x / safe


def apply_whitening(t: WhiteningTransform, x: np.ndarray) -> np.ndarray:
    """Project one descriptor and L2-normalize the result."""
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise NonFinite("descriptor contains NaN/Inf")
    return l2_normalize(t.project(x))


def apply_whitening_batch(t: WhiteningTransform, x: np.ndarray) -> np.ndarray:
    return l2_normalize_rows(t.project(x))
