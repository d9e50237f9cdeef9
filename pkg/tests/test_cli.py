import numpy as np
import pytest

from vladkit import fileio
from vladkit.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A small dataset plus every artifact the subcommands chain together."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main([
        "synth", "--classes", "3", "--per-class", "8", "--height", "4",
        "--width", "4", "--dim", "6", "--noise", "0.1", "--seed", "11",
        "--out-dir", str(data),
    ]) == 0
    # Entry paths stay relative to the manifest's directory, so the split
    # manifests must live next to the feature maps they reference.
    assert main([
        "split", "--manifest", str(data / "manifest.tsv"), "--per-class", "4",
        "--seed", "1", "--out-train", str(data / "train.tsv"),
        "--out-test", str(data / "test.tsv"),
    ]) == 0
    return root


def test_synth_writes_manifest_and_maps(workspace):
    manifest = fileio.load_manifest(workspace / "data" / "manifest.tsv")
    assert len(manifest.entries) == 24
    fmap = fileio.read_feature_map(
        fileio.resolve_entry(workspace / "data" / "manifest.tsv", manifest.entries[0][0])
    )
    assert fmap.descriptors().shape == (16, 6)


def test_split_counts(workspace):
    train = fileio.load_manifest(workspace / "data" / "train.tsv")
    test = fileio.load_manifest(workspace / "data" / "test.tsv")
    assert len(train.entries) == 12
    assert len(test.entries) == 12


def test_preprocess_fit_and_apply(workspace):
    out = workspace / "transform.vlw"
    assert main([
        "preprocess", "fit", "--manifest", str(workspace / "data" / "train.tsv"),
        "--out", str(out),
    ]) == 0
    mean, projection = fileio.read_whitening(out)
    assert mean.shape == (6,)
    assert projection.shape == (6, 6)
    manifest = fileio.load_manifest(workspace / "data" / "train.tsv")
    src = fileio.resolve_entry(workspace / "data" / "train.tsv", manifest.entries[0][0])
    dst = workspace / "whitened.vlf"
    assert main([
        "preprocess", "apply", "--transform", str(out),
        "--in", str(src), "--out", str(dst),
    ]) == 0
    whitened = fileio.read_feature_map(dst)
    norms = np.linalg.norm(whitened.descriptors(), axis=1)
    assert np.allclose(norms, 1.0, atol=1e-5)


def test_codebook_train(workspace):
    out = workspace / "dictionary.vld"
    assert main([
        "codebook", "train", "--manifest", str(workspace / "data" / "train.tsv"),
        "--transform", str(workspace / "transform.vlw"),
        "--words", "5", "--out", str(out),
    ]) == 0
    centers = fileio.read_dictionary(out)
    assert centers.shape == (5, 6)


def test_encode_single_map(workspace):
    manifest = fileio.load_manifest(workspace / "data" / "train.tsv")
    src = fileio.resolve_entry(workspace / "data" / "train.tsv", manifest.entries[0][0])
    out = workspace / "one.vle"
    assert main([
        "encode", "--dict", str(workspace / "dictionary.vld"),
        "--transform", str(workspace / "transform.vlw"),
        "--in", str(src), "--out", str(out), "--mode", "sa",
    ]) == 0
    values = fileio.read_encoding(out)
    assert values.shape == (5 * 6,)
    assert abs(np.linalg.norm(values) - 1.0) < 1e-5


def test_encode_with_pyramid_length(workspace):
    manifest = fileio.load_manifest(workspace / "data" / "train.tsv")
    src = fileio.resolve_entry(workspace / "data" / "train.tsv", manifest.entries[0][0])
    out = workspace / "pyr.vle"
    assert main([
        "encode", "--dict", str(workspace / "dictionary.vld"),
        "--transform", str(workspace / "transform.vlw"),
        "--in", str(src), "--out", str(out), "--pyramid", "a",
    ]) == 0
    # Preset "a" has 1 + 4 + 3 = 8 regions.
    assert fileio.read_encoding(out).shape == (8 * 5 * 6,)


def test_train_and_evaluate(workspace, capsys):
    model_path = workspace / "model.vlm"
    assert main([
        "train", "--manifest", str(workspace / "data" / "train.tsv"),
        "--dict", str(workspace / "dictionary.vld"),
        "--transform", str(workspace / "transform.vlw"),
        "--out", str(model_path), "--mode", "sa",
    ]) == 0
    weights, biases = fileio.read_model(model_path)
    assert weights.shape == (3, 30)
    assert biases.shape == (3,)
    confusion_path = workspace / "confusion.csv"
    assert main([
        "evaluate", "--manifest", str(workspace / "data" / "test.tsv"),
        "--model", str(model_path),
        "--dict", str(workspace / "dictionary.vld"),
        "--transform", str(workspace / "transform.vlw"),
        "--confusion-out", str(confusion_path), "--mode", "sa",
    ]) == 0
    out = capsys.readouterr().out
    line = [l for l in out.splitlines() if l.startswith("accuracy=")][-1]
    accuracy = float(line.split("=", 1)[1])
    assert 0.0 <= accuracy <= 1.0
    rows = [r.split(",") for r in confusion_path.read_text().strip().splitlines()]
    total = sum(int(v) for r in rows for v in r)
    assert total == 12


def test_bench_writes_csv(workspace, tmp_path):
    out = tmp_path / "bench.csv"
    assert main([
        "bench", "--train-manifest", str(workspace / "data" / "train.tsv"),
        "--test-manifest", str(workspace / "data" / "test.tsv"),
        "--modes", "hard,sa", "--pyramids", "none,2x2",
        "--words", "4", "--work-dir", str(tmp_path / "work"),
        "--out", str(out),
    ]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 5  # header + 2x2 cross product
    assert lines[0].split(",")[0] == "mode"


def test_pipeline_from_config_file(workspace, tmp_path, capsys):
    config = tmp_path / "config"
    config.write_text("mode = sa\nwords = 5\nepochs = 20\n")
    assert main([
        "pipeline", "--config", str(config),
        "--train-manifest", str(workspace / "data" / "train.tsv"),
        "--test-manifest", str(workspace / "data" / "test.tsv"),
        "--work-dir", str(tmp_path / "work"),
    ]) == 0
    out = capsys.readouterr().out
    assert any(l.startswith("accuracy=") for l in out.splitlines())


def test_usage_errors_exit_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["synth", "--classes", "3"]) == 1  # missing required flags
    assert main([]) == 1
    capsys.readouterr()


def test_data_errors_exit_2(workspace, tmp_path, capsys):
    missing = tmp_path / "missing.vld"
    manifest = fileio.load_manifest(workspace / "data" / "train.tsv")
    src = fileio.resolve_entry(workspace / "data" / "train.tsv", manifest.entries[0][0])
    assert main([
        "encode", "--dict", str(missing), "--in", str(src),
        "--out", str(tmp_path / "x.vle"),
    ]) == 2
    # Wrong magic: feed a dictionary reader a feature-map file.
    assert main([
        "encode", "--dict", str(src), "--in", str(src),
        "--out", str(tmp_path / "x.vle"),
    ]) == 2
    err = capsys.readouterr().err
    assert "error" in err


def test_pipeline_bad_config_exits(tmp_path, workspace, capsys):
    config = tmp_path / "config"
    config.write_text("unknown_key = 1\n")
    assert main([
        "pipeline", "--config", str(config),
        "--train-manifest", str(workspace / "data" / "train.tsv"),
        "--test-manifest", str(workspace / "data" / "test.tsv"),
        "--work-dir", str(tmp_path / "work"),
    ]) == 2
    capsys.readouterr()
