import struct

import numpy as np
import pytest

from vladkit import errors, fileio
from vladkit.fileio import DatasetManifest, FeatureMap


def random_map(rng):
    h, w, d = rng.integers(1, 6, size=3)
    data = rng.standard_normal((h, w, d)).astype(np.float32)
    return FeatureMap(data)


def test_smallest_valid_map(tmp_path):
    path = tmp_path / "m.vlf"
    payload = b"VLF1" + struct.pack("<III", 1, 1, 2) + struct.pack("<2f", 1.0, 0.0)
    path.write_bytes(payload)
    fmap = fileio.read_feature_map(path)
    assert (fmap.height, fmap.width, fmap.dim) == (1, 1, 2)
    assert fmap.data.reshape(-1).tolist() == [1.0, 0.0]


def test_write_size_arithmetic(tmp_path):
    fmap = FeatureMap(np.array([1, 2, 3, 4], dtype=np.float32).reshape(2, 2, 1))
    path = tmp_path / "m.vlf"
    fileio.write_feature_map(fmap, path)
    assert path.stat().st_size == 4 + 3 * 4 + 16


def test_bad_magic(tmp_path):
    path = tmp_path / "m.vlf"
    path.write_bytes(b"XXXX" + struct.pack("<III", 1, 1, 1) + struct.pack("<f", 0.0))
    with pytest.raises(errors.BadMagic):
        fileio.read_feature_map(path)


def test_truncated(tmp_path):
    path = tmp_path / "m.vlf"
    path.write_bytes(b"VLF1" + struct.pack("<III", 2, 2, 3) + struct.pack("<11f", *range(11)))
    with pytest.raises(errors.TruncatedFile):
        fileio.read_feature_map(path)


def test_nan_refused_on_write(tmp_path):
    with pytest.raises(errors.NonFinite):
        FeatureMap(np.array([[[np.nan]]], dtype=np.float32))


def test_nan_refused_on_read(tmp_path):
    path = tmp_path / "m.vlf"
    path.write_bytes(b"VLF1" + struct.pack("<III", 1, 1, 1) + struct.pack("<f", float("nan")))
    with pytest.raises(errors.NonFinite):
        fileio.read_feature_map(path)


def test_feature_map_roundtrip_bytes(tmp_path):
    rng = np.random.default_rng(7)
    for i in range(100):
        fmap = random_map(rng)
        p1 = tmp_path / f"a{i}.vlf"
        p2 = tmp_path / f"b{i}.vlf"
        fileio.write_feature_map(fmap, p1)
        fileio.write_feature_map(fileio.read_feature_map(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()


def test_dictionary_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    centers = rng.standard_normal((5, 3)).astype(np.float32)
    path = tmp_path / "d.vld"
    fileio.write_dictionary(centers, path)
    assert np.array_equal(fileio.read_dictionary(path), centers)


def test_whitening_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    mean = rng.standard_normal(4).astype(np.float32)
    projection = rng.standard_normal((3, 4)).astype(np.float32)
    path = tmp_path / "t.vlw"
    fileio.write_whitening(mean, projection, path)
    mean2, projection2 = fileio.read_whitening(path)
    assert np.array_equal(mean, mean2)
    assert np.array_equal(projection, projection2)


def test_encoding_roundtrip(tmp_path):
    values = np.arange(10, dtype=np.float32)
    path = tmp_path / "e.vle"
    fileio.write_encoding(values, path)
    assert np.array_equal(fileio.read_encoding(path), values)


def test_model_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    weights = rng.standard_normal((4, 6)).astype(np.float32)
    biases = rng.standard_normal(4).astype(np.float32)
    path = tmp_path / "m.vlm"
    fileio.write_model(weights, biases, path)
    w2, b2 = fileio.read_model(path)
    assert np.array_equal(weights, w2)
    assert np.array_equal(biases, b2)


def test_manifest_basic(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("a.vlf\t0\nb.vlf\t1\n")
    manifest = fileio.load_manifest(path)
    assert manifest.entries == (("a.vlf", 0), ("b.vlf", 1))
    assert manifest.num_classes == 2


def test_manifest_empty(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("")
    with pytest.raises(errors.ParseError):
        fileio.load_manifest(path)


def test_manifest_negative_label(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("a.vlf\t-1\n")
    with pytest.raises(errors.NegativeLabel):
        fileio.load_manifest(path)


def test_manifest_malformed(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("a.vlf 0\n")
    with pytest.raises(errors.ParseError):
        fileio.load_manifest(path)


def test_manifest_save_roundtrip(tmp_path):
    manifest = DatasetManifest((("x.vlf", 0), ("y.vlf", 2)), 3)
    path = tmp_path / "m.tsv"
    fileio.save_manifest(manifest, path)
    assert fileio.load_manifest(path) == manifest
