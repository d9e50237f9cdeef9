"""Synthetic feature-map datasets for desk-scale verification.

Two constructions:

* descriptor-signal: classes differ in which mixture components their
  descriptors come from (per-class component counts are fixed, so with zero
  noise the per-image mean descriptor identifies the class exactly).
  Spatial placement is a random permutation, so a 1x1 encoding suffices.

* spatial-signal: every class sees the *same* multiset of descriptors per
  image index; classes differ only in how the shared bag is laid out on the
  grid. The bag is grouped by mixture component and each class fills the
  grid cells in a class-specific traversal order, so only encoders that see
  spatial structure (pyramids finer than 1x1) can separate the classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fileio import DatasetManifest, FeatureMap, save_manifest, write_feature_map

_NUM_COMPONENT_GROUPS = 4  # spatial-signal bag groups; matches 2x2 quadrant count


@dataclass(frozen=True)
class SynthSpec:
    num_classes: int
    images_per_class: int
    grid_h: int
    grid_w: int
    dim: int
    mode: str = "descriptor-signal"  # or "spatial-signal"
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("descriptor-signal", "spatial-signal"):
            raise ValueError(f"unknown synth mode {self.mode!r}")
        for name in ("num_classes", "images_per_class", "grid_h", "grid_w", "dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def _largest_remainder_counts(total: int, proportions: np.ndarray) -> np.ndarray:
    """Integer allocation of `total` items with the largest-remainder method.
    Remainder ties go to the lowest index, keeping the split deterministic."""
    raw = proportions * total
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def class_proportions(num_classes: int) -> np.ndarray:
    """Mixture proportions for descriptor-signal class c: weight 0.6 on
    component c and 0.4 on component c+1 (cyclic). Each class occupies a
    distinct component pair, so the class identity shows up in *which*
    visual words an image touches, not just in residual magnitudes."""
    if num_classes == 1:
        return np.array([[1.0]])
    p = np.zeros((num_classes, num_classes))
    for c in range(num_classes):
        p[c, c] = 0.6
        p[c, (c + 1) % num_classes] = 0.4
    return p


def _cell_order(h: int, w: int, pattern: int) -> np.ndarray:
    """Four grid traversals: row-major, reverse row-major, column-major,
    reverse column-major. Returns flat row-major cell indices in visit order."""
    idx = np.arange(h * w).reshape(h, w)
    if pattern == 0:
        return idx.reshape(-1)
    if pattern == 1:
        return idx[::-1, ::-1].reshape(-1)
    if pattern == 2:
        return idx.T.reshape(-1)
    return idx.T[::-1, ::-1].reshape(-1)


def _descriptor_signal_images(spec: SynthSpec, rng: np.random.Generator):
    n = spec.grid_h * spec.grid_w
    components = rng.normal(size=(spec.num_classes, spec.dim)) * 2.0
    # Small class-specific shift within each component: keeps codebook
    # clusters intact but gives residuals a systematic, class-dependent
    # direction that survives per-word normalization.
    offsets = rng.normal(size=(spec.num_classes, spec.dim))
    offsets *= 0.3 / np.linalg.norm(offsets, axis=1, keepdims=True)
    proportions = class_proportions(spec.num_classes)
    for c in range(spec.num_classes):
        counts = _largest_remainder_counts(n, proportions[c])
        base = np.repeat(np.arange(spec.num_classes), counts)
        for _ in range(spec.images_per_class):
            noise = rng.normal(size=(n, spec.dim)) * spec.noise_sigma
            desc = components[base] + offsets[c] + noise
            placement = rng.permutation(n)
            grid = np.empty((n, spec.dim))
            grid[placement] = desc
            yield c, grid.reshape(spec.grid_h, spec.grid_w, spec.dim)


def _spatial_signal_images(spec: SynthSpec, rng: np.random.Generator):
    n = spec.grid_h * spec.grid_w
    g = _NUM_COMPONENT_GROUPS
    components = rng.normal(size=(g, spec.dim)) * 2.0
    counts = _largest_remainder_counts(n, np.full(g, 1.0 / g))
    base = np.repeat(np.arange(g), counts)
    # Graded within-group offset along a per-group direction. It is part of
    # the shared bag (identical for every class), but it ties each bag slot
    # to a recognizable descriptor value, so the residuals inside a pyramid
    # region point in a class-dependent direction instead of averaging to
    # noise. Without it, per-region word blocks carry only occupancy counts,
    # which intra-normalization erases.
    drift_dir = rng.normal(size=(g, spec.dim))
    drift_dir /= np.linalg.norm(drift_dir, axis=1, keepdims=True)
    frac = np.concatenate([np.arange(c) / max(1, c - 1) - 0.5 for c in counts])
    slot_means = components[base] + drift_dir[base] * frac[:, None] * 1.4
    # One shared bag per image index; classes only permute its placement.
    shift_unit = max(1, n // (2 * (1 + spec.num_classes // 4)))
    for i in range(spec.images_per_class):
        bag = slot_means + rng.normal(size=(n, spec.dim)) * spec.noise_sigma
        for c in range(spec.num_classes):
            order = _cell_order(spec.grid_h, spec.grid_w, c % 4)
            shift = (c // 4) * shift_unit
            grid = np.empty((n, spec.dim))
            grid[order] = np.roll(bag, -shift, axis=0)
            yield c, i, grid.reshape(spec.grid_h, spec.grid_w, spec.dim)


def synth_dataset(spec: SynthSpec, out_dir) -> DatasetManifest:
    """Write the feature-map files plus a `manifest.tsv` into out_dir and
    return the manifest. Pure function of (spec.seed, spec): identical specs
    produce byte-identical directories."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    entries = []
    if spec.mode == "descriptor-signal":
        per_class_counter = [0] * spec.num_classes
        for c, grid in _descriptor_signal_images(spec, rng):
            i = per_class_counter[c]
            per_class_counter[c] += 1
            name = f"c{c:03d}_i{i:04d}.vlf"
            write_feature_map(FeatureMap(grid.astype(np.float32)), out_dir / name)
            entries.append((name, c))
    else:
        named = {}
        for c, i, grid in _spatial_signal_images(spec, rng):
            name = f"c{c:03d}_i{i:04d}.vlf"
            write_feature_map(FeatureMap(grid.astype(np.float32)), out_dir / name)
            named[(c, i)] = name
        for c in range(spec.num_classes):
            for i in range(spec.images_per_class):
                entries.append((named[(c, i)], c))
    manifest = DatasetManifest(tuple(entries), spec.num_classes)
    save_manifest(manifest, out_dir / "manifest.tsv")
    return manifest


def split_manifest(
    manifest: DatasetManifest, per_class: int, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Seeded n-per-class train/test split. Entries keep manifest order."""
    rng = np.random.default_rng(seed)
    train_idx: set[int] = set()
    for c in range(manifest.num_classes):
        idx = [i for i, (_, label) in enumerate(manifest.entries) if label == c]
        chosen = rng.permutation(len(idx))[:per_class]
        train_idx.update(idx[j] for j in chosen)
    train = [e for i, e in enumerate(manifest.entries) if i in train_idx]
    test = [e for i, e in enumerate(manifest.entries) if i not in train_idx]
    return (
        DatasetManifest(tuple(train), manifest.num_classes),
        DatasetManifest(tuple(test), manifest.num_classes),
    )
