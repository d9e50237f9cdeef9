"""Spatial pyramid pooling over the descriptor grid.

Each pyramid level (r, c) cuts the H x W grid into r*c regions with
floor-proportional boundaries; every region is encoded independently and the
segments are concatenated level by level (row-major within a level), then
globally L2-normalized. Empty regions contribute an all-zero segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Dictionary
from .errors import ParseError
from .fileio import FeatureMap
from .vlad import EncoderConfig, encode_descriptors
from .whitening import WhiteningTransform, apply_whitening_batch, l2_normalize

PRESETS = {
    "a": ((1, 1), (2, 2), (3, 1)),
    "b": ((1, 1), (2, 2), (1, 3)),
    "c": ((1, 1), (2, 2), (4, 4)),
}


@dataclass(frozen=True)
class PyramidSpec:
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("pyramid needs at least one level")
        for r, c in self.levels:
            if r < 1 or c < 1:
                raise ValueError(f"bad pyramid level ({r}, {c})")

    @property
    def total_regions(self) -> int:
        return sum(r * c for r, c in self.levels)


@dataclass(frozen=True)
class SpmEncoding:
    pyramid: PyramidSpec
    segment_len: int
    values: np.ndarray  # (total_regions * segment_len,)


def parse_pyramid(text: str) -> PyramidSpec:
    """Accepts a preset name (a, b, c) or a custom "RxC,RxC,..." string."""
    if text in PRESETS:
        return PyramidSpec(PRESETS[text])
    levels = []
    for part in text.split(","):
        pieces = part.lower().split("x")
        if len(pieces) != 2:
            raise ParseError(f"bad pyramid level {part!r}; expected RxC")
        try:
            levels.append((int(pieces[0]), int(pieces[1])))
        except ValueError:
            raise ParseError(f"bad pyramid level {part!r}; expected RxC")
    try:
        return PyramidSpec(tuple(levels))
    except ValueError as exc:
        raise ParseError(str(exc))


def region_bounds(n: int, parts: int) -> list[tuple[int, int]]:
    """Floor-proportional split of [0, n) into `parts` half-open intervals."""
    return [(i * n // parts, (i + 1) * n // parts) for i in range(parts)]


def partition(fmap: FeatureMap, spec: PyramidSpec) -> list[np.ndarray]:
    """Descriptor subsets per region, ordered level by level then row-major.
    Regions can be empty when a level is finer than the grid."""
    regions = []
    for r, c in spec.levels:
        rows = region_bounds(fmap.height, r)
        cols = region_bounds(fmap.width, c)
        for r0, r1 in rows:
            for c0, c1 in cols:
                cells = fmap.data[r0:r1, c0:c1]
                regions.append(cells.reshape(-1, fmap.dim))
    return regions


def encode_spm(
    fmap: FeatureMap,
    dictionary: Dictionary,
    transform: WhiteningTransform | None,
    config: EncoderConfig,
    spec: PyramidSpec,
) -> SpmEncoding:
    segment_len = dictionary.num_words * dictionary.dim
    segments = []
    for region in partition(fmap, spec):
        if region.shape[0] == 0:
            segments.append(np.zeros(segment_len))
            continue
        descriptors = region.astype(np.float64)
        if transform is not None:
            descriptors = apply_whitening_batch(transform, descriptors)
        segments.append(encode_descriptors(dictionary, descriptors, config))
    values = l2_normalize(np.concatenate(segments))
    return SpmEncoding(pyramid=spec, segment_len=segment_len, values=values)
