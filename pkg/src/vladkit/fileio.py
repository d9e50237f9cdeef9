"""Binary containers and dataset manifests.

All containers share the same layout idea: 4-byte ASCII magic, little-endian
u32 header fields, then a little-endian float32 payload. One container per
file. The five magics are

    VLF1  feature map      (H, W, D, then H*W*D floats, row-major)
    VLD1  dictionary       (M, D, then M*D floats)
    VLW1  whitening        (D_in, D_out, D_in mean floats, D_out*D_in floats)
    VLE1  encoding         (length, then floats)
    VLM1  linear model     (C, dim, then C*(dim+1) floats, weights then bias)

Manifests are UTF-8 text, one "path<TAB>label" per line, LF endings.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    NegativeLabel,
    NonFinite,
    ParseError,
    TruncatedFile,
)

_HEADER = struct.Struct("<4s")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class FeatureMap:
    """An H x W grid of D-dimensional local descriptors."""

    data: np.ndarray  # (H, W, D) float32

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError("feature map data must be H x W x D")
        if not np.isfinite(self.data).all():
            raise NonFinite("feature map contains NaN/Inf")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    def descriptors(self) -> np.ndarray:
        """Row-major flattening to an (H*W, D) matrix."""
        return self.data.reshape(-1, self.dim)


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[tuple[str, int], ...]
    num_classes: int


def _read_exact(f, n: int, path) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedFile(f"{path}: expected {n} more bytes, got {len(buf)}")
    return buf


def _read_container(path, magic: bytes, n_header: int):
    """Return (header ints, float32 payload). Payload length is validated by
    the caller, but trailing garbage is rejected here."""
    path = Path(path)
    with open(path, "rb") as f:
        got = f.read(4)
        if got != magic:
            raise BadMagic(f"{path}: expected magic {magic!r}, got {got!r}")
        header = [
            _U32.unpack(_read_exact(f, 4, path))[0] for _ in range(n_header)
        ]
        payload = f.read()
    floats = np.frombuffer(payload, dtype="<f4")
    if len(payload) % 4 != 0:
        raise TruncatedFile(f"{path}: payload not a whole number of floats")
    return header, floats


def _check_payload(path, floats: np.ndarray, expected: int) -> np.ndarray:
    if floats.size != expected:
        raise TruncatedFile(
            f"{path}: expected {expected} floats, found {floats.size}"
        )
    if not np.isfinite(floats).all():
        raise NonFinite(f"{path}: payload contains NaN/Inf")
    return floats


def _write_container(path, magic: bytes, header: list[int], payload: np.ndarray):
    values = np.ascontiguousarray(payload, dtype="<f4")
    if not np.isfinite(values).all():
        raise NonFinite(f"refusing to write non-finite payload to {path}")
    with open(path, "wb") as f:
        f.write(magic)
        for h in header:
            f.write(_U32.pack(h))
        f.write(values.tobytes())


# -- feature maps ------------------------------------------------------------

def read_feature_map(path) -> FeatureMap:
    (h, w, d), floats = _read_container(path, b"VLF1", 3)
    if h < 1 or w < 1 or d < 1:
        raise ParseError(f"{path}: non-positive dimensions {h}x{w}x{d}")
    floats = _check_payload(path, floats, h * w * d)
    return FeatureMap(floats.astype(np.float32).reshape(h, w, d))


def write_feature_map(fmap: FeatureMap, path) -> None:
    _write_container(
        path, b"VLF1", [fmap.height, fmap.width, fmap.dim], fmap.data.reshape(-1)
    )


# -- dictionaries ------------------------------------------------------------

def read_dictionary(path) -> np.ndarray:
    """Returns the (M, D) centers matrix."""
    (m, d), floats = _read_container(path, b"VLD1", 2)
    if m < 1 or d < 1:
        raise ParseError(f"{path}: non-positive dictionary shape {m}x{d}")
    return _check_payload(path, floats, m * d).astype(np.float32).reshape(m, d)


def write_dictionary(centers: np.ndarray, path) -> None:
    centers = np.asarray(centers)
    _write_container(path, b"VLD1", list(centers.shape), centers.reshape(-1))


# -- whitening transforms ----------------------------------------------------

def read_whitening(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (mean, projection) with projection shaped (D_out, D_in)."""
    (d_in, d_out), floats = _read_container(path, b"VLW1", 2)
    if d_in < 1 or d_out < 1 or d_out > d_in:
        raise ParseError(f"{path}: bad whitening dims {d_in}->{d_out}")
    floats = _check_payload(path, floats, d_in + d_out * d_in)
    mean = floats[:d_in].astype(np.float32)
    projection = floats[d_in:].astype(np.float32).reshape(d_out, d_in)
    return mean, projection


def write_whitening(mean: np.ndarray, projection: np.ndarray, path) -> None:
    mean = np.asarray(mean).reshape(-1)
    projection = np.asarray(projection)
    d_out, d_in = projection.shape
    if mean.size != d_in:
        raise DimMismatch(
            f"mean length {mean.size} does not match projection D_in {d_in}"
        )
    payload = np.concatenate([mean, projection.reshape(-1)])
    _write_container(path, b"VLW1", [d_in, d_out], payload)


# -- encodings ---------------------------------------------------------------

def read_encoding(path) -> np.ndarray:
    (n,), floats = _read_container(path, b"VLE1", 1)
    return _check_payload(path, floats, n).astype(np.float32)


def write_encoding(values: np.ndarray, path) -> None:
    values = np.asarray(values).reshape(-1)
    _write_container(path, b"VLE1", [values.size], values)


# -- linear models -----------------------------------------------------------

def read_model(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (weights, biases) with weights shaped (C, dim)."""
    (c, dim), floats = _read_container(path, b"VLM1", 2)
    if c < 1 or dim < 1:
        raise ParseError(f"{path}: bad model shape C={c}, dim={dim}")
    floats = _check_payload(path, floats, c * (dim + 1))
    rows = floats.astype(np.float32).reshape(c, dim + 1)
    return rows[:, :dim].copy(), rows[:, dim].copy()


def write_model(weights: np.ndarray, biases: np.ndarray, path) -> None:
    weights = np.asarray(weights)
    biases = np.asarray(biases).reshape(-1, 1)
    rows = np.hstack([weights, biases])
    _write_container(path, b"VLM1", [weights.shape[0], weights.shape[1]], rows.reshape(-1))


# -- manifests ---------------------------------------------------------------

def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'path<TAB>label'")
            rel, label_text = parts
            try:
                label = int(label_text)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad label {label_text!r}")
            if label < 0:
                raise NegativeLabel(f"{path}:{lineno}: label {label} < 0")
            entries.append((rel, label))
    if not entries:
        raise ParseError(f"{path}: empty manifest")
    num_classes = 1 + max(label for _, label in entries)
    return DatasetManifest(tuple(entries), num_classes)


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rel, label in manifest.entries:
            f.write(f"{rel}\t{label}\n")


def resolve_entry(manifest_path, rel: str) -> Path:
    """Manifest paths are relative to the manifest file's directory."""
    rel_path = Path(rel)
    if rel_path.is_absolute():
        return rel_path
    return Path(manifest_path).parent / rel_path
