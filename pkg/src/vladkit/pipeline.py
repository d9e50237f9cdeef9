"""End-to-end orchestration: whitening fit, codebook training, encoding of
every manifest entry, classifier training, and evaluation, with on-disk
caching of intermediates keyed by a content hash of the configuration and
the input manifests."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import fileio
from .assignment import MODES, AssignConfig
from .classifier import EvalReport, LinearModel, TrainHyper, predict, tabulate, train_ovr
from .codebook import Dictionary, kmeans_train, subsample
from .errors import CacheMismatch, ParseError
from .fileio import DatasetManifest, read_feature_map, resolve_entry
from .spm import PyramidSpec, encode_spm, parse_pyramid
from .vlad import NORM_SCHEMES, EncoderConfig, encode
from .whitening import WhiteningTransform, fit_whitening

_DEFAULTS = {
    "mode": "hard",
    "beta": "1.0",
    "knn": "5",
    "lambda": "1e-4",
    "sigma": "1.0",
    "norm_scheme": "intra-then-global",
    "pyramid": "none",
    "whiten": "true",
    "pca_dim": "auto",
    "epsilon": "auto",
    "words": "64",
    "max_iters": "100",
    "tol": "1e-4",
    "subsample": "auto",
    "reg": "1e-4",
    "epochs": "50",
    "seed": "0",
}


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "hard"
    beta: float = 1.0
    knn: int = 5
    lam: float = 1e-4
    sigma: float = 1.0
    norm_scheme: str = "intra-then-global"
    pyramid: str | None = None  # preset name or RxC,... ; None = no pyramid
    whiten: bool = True
    pca_dim: int | None = None
    epsilon: float | None = None
    words: int = 64
    max_iters: int = 100
    tol: float = 1e-4
    subsample: int | None = None  # descriptor cap for k-means; None = 256*words
    reg: float = 1e-4
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParseError(f"unknown mode {self.mode!r}")
        if self.norm_scheme not in NORM_SCHEMES:
            raise ParseError(f"unknown norm_scheme {self.norm_scheme!r}")

    def assign_config(self) -> AssignConfig:
        return AssignConfig(
            mode=self.mode, beta=self.beta, k_nn=self.knn, lam=self.lam, sigma=self.sigma
        )

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(assign=self.assign_config(), norm_scheme=self.norm_scheme)

    def pyramid_spec(self) -> PyramidSpec | None:
        if self.pyramid is None:
            return None
        return parse_pyramid(self.pyramid)


def config_to_text(config: PipelineConfig) -> str:
    """Canonical flat key=value rendering; also the cache-key input."""
    values = {
        "mode": config.mode,
        "beta": repr(config.beta),
        "knn": str(config.knn),
        "lambda": repr(config.lam),
        "sigma": repr(config.sigma),
        "norm_scheme": config.norm_scheme,
        "pyramid": config.pyramid if config.pyramid is not None else "none",
        "whiten": "true" if config.whiten else "false",
        "pca_dim": "auto" if config.pca_dim is None else str(config.pca_dim),
        "epsilon": "auto" if config.epsilon is None else repr(config.epsilon),
        "words": str(config.words),
        "max_iters": str(config.max_iters),
        "tol": repr(config.tol),
        "subsample": "auto" if config.subsample is None else str(config.subsample),
        "reg": repr(config.reg),
        "epochs": str(config.epochs),
        "seed": str(config.seed),
    }
    return "".join(f"{k} = {values[k]}\n" for k in sorted(values))


def parse_config_text(text: str) -> PipelineConfig:
    values = dict(_DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _DEFAULTS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return config_from_strings(values)


def _opt_int(text: str) -> int | None:
    return None if text == "auto" else int(text)


def _opt_float(text: str) -> float | None:
    return None if text == "auto" else float(text)


def config_from_strings(values: dict[str, str]) -> PipelineConfig:
    try:
        return PipelineConfig(
            mode=values["mode"],
            beta=float(values["beta"]),
            knn=int(values["knn"]),
            lam=float(values["lambda"]),
            sigma=float(values["sigma"]),
            norm_scheme=values["norm_scheme"],
            pyramid=None if values["pyramid"] == "none" else values["pyramid"],
            whiten=values["whiten"].lower() in ("true", "1", "yes"),
            pca_dim=_opt_int(values["pca_dim"]),
            epsilon=_opt_float(values["epsilon"]),
            words=int(values["words"]),
            max_iters=int(values["max_iters"]),
            tol=float(values["tol"]),
            subsample=_opt_int(values["subsample"]),
            reg=float(values["reg"]),
            epochs=int(values["epochs"]),
            seed=int(values["seed"]),
        )
    except ValueError as exc:
        raise ParseError(f"bad config value: {exc}") from None


def load_config(path) -> PipelineConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


# -- encoding helpers --------------------------------------------------------

def load_descriptor_stack(manifest: DatasetManifest, manifest_path) -> np.ndarray:
    """All descriptors from every manifest entry, stacked row-wise."""
    blocks = [
        read_feature_map(resolve_entry(manifest_path, rel)).descriptors()
        for rel, _ in manifest.entries
    ]
    return np.vstack(blocks).astype(np.float64)


def encode_entry(
    fmap,
    dictionary: Dictionary,
    transform: WhiteningTransform | None,
    config: PipelineConfig,
) -> np.ndarray:
    spec = config.pyramid_spec()
    if spec is None:
        return encode(dictionary, fmap, transform, config.encoder_config())
    return encode_spm(fmap, dictionary, transform, config.encoder_config(), spec).values


def encode_manifest(
    manifest: DatasetManifest,
    manifest_path,
    dictionary: Dictionary,
    transform: WhiteningTransform | None,
    config: PipelineConfig,
) -> tuple[np.ndarray, np.ndarray]:
    encodings = []
    labels = []
    for rel, label in manifest.entries:
        fmap = read_feature_map(resolve_entry(manifest_path, rel))
        encodings.append(encode_entry(fmap, dictionary, transform, config))
        labels.append(label)
    return np.stack(encodings), np.array(labels, dtype=int)


# -- the pipeline ------------------------------------------------------------

def _cache_key(config: PipelineConfig, train_manifest_path, test_manifest_path) -> str:
    payload = (
        config_to_text(config).encode()
        + Path(train_manifest_path).read_bytes()
        + Path(test_manifest_path).read_bytes()
    )
    return f"{fnv1a64(payload):016x}"


def run_pipeline(
    config: PipelineConfig,
    train_manifest_path,
    test_manifest_path,
    work_dir,
) -> EvalReport:
    """fit whitening -> train codebook -> encode -> train -> evaluate,
    reusing any cached artifacts under work_dir whose headers match."""
    work_dir = Path(work_dir)
    cache = work_dir / f"cache_{_cache_key(config, train_manifest_path, test_manifest_path)}"
    cache.mkdir(parents=True, exist_ok=True)

    train_manifest = fileio.load_manifest(train_manifest_path)
    test_manifest = fileio.load_manifest(test_manifest_path)

    transform = None
    transform_path = cache / "transform.vlw"
    if config.whiten:
        if transform_path.exists():
            mean, projection = fileio.read_whitening(transform_path)
            transform = WhiteningTransform(
                mean=mean.astype(np.float64),
                projection=projection.astype(np.float64),
                epsilon=0.0,
            )
        else:
            descriptors = load_descriptor_stack(train_manifest, train_manifest_path)
            transform = fit_whitening(descriptors, config.pca_dim, config.epsilon)
            fileio.write_whitening(transform.mean, transform.projection, transform_path)
            # Reload so cached and fresh runs use identical float32 parameters.
            mean, projection = fileio.read_whitening(transform_path)
            transform = WhiteningTransform(
                mean=mean.astype(np.float64),
                projection=projection.astype(np.float64),
                epsilon=transform.epsilon,
            )

    dict_path = cache / "dictionary.vld"
    if dict_path.exists():
        centers = fileio.read_dictionary(dict_path)
        if centers.shape[0] != config.words:
            raise CacheMismatch(
                f"cached dictionary has {centers.shape[0]} words, config wants {config.words}"
            )
        dictionary = Dictionary(centers=centers.astype(np.float64))
    else:
        descriptors = load_descriptor_stack(train_manifest, train_manifest_path)
        if transform is not None:
            from .whitening import apply_whitening_batch

            descriptors = apply_whitening_batch(transform, descriptors)
        cap = config.subsample if config.subsample is not None else 256 * config.words
        descriptors = subsample(descriptors, cap, config.seed)
        dictionary, _ = kmeans_train(
            descriptors, config.words, config.max_iters, config.tol, config.seed
        )
        fileio.write_dictionary(dictionary.centers, dict_path)
        dictionary = Dictionary(
            centers=fileio.read_dictionary(dict_path).astype(np.float64)
        )
    if transform is not None and dictionary.dim != transform.output_dim:
        raise CacheMismatch(
            f"dictionary dim {dictionary.dim} != whitening output {transform.output_dim}"
        )

    def encoded_split(manifest, manifest_path, tag):
        enc_dir = cache / f"enc_{tag}"
        enc_dir.mkdir(exist_ok=True)
        rows, labels = [], []
        for idx, (rel, label) in enumerate(manifest.entries):
            enc_path = enc_dir / f"{idx:06d}.vle"
            if enc_path.exists():
                values = fileio.read_encoding(enc_path).astype(np.float64)
            else:
                fmap = read_feature_map(resolve_entry(manifest_path, rel))
                values = encode_entry(fmap, dictionary, transform, config)
                fileio.write_encoding(values, enc_path)
                values = fileio.read_encoding(enc_path).astype(np.float64)
            rows.append(values)
            labels.append(label)
        return np.stack(rows), np.array(labels, dtype=int)

    train_x, train_y = encoded_split(train_manifest, train_manifest_path, "train")
    test_x, test_y = encoded_split(test_manifest, test_manifest_path, "test")

    model_path = cache / "model.vlm"
    if model_path.exists():
        weights, biases = fileio.read_model(model_path)
        if weights.shape[1] != train_x.shape[1]:
            raise CacheMismatch(
                f"cached model dim {weights.shape[1]} != encoding dim {train_x.shape[1]}"
            )
        model = LinearModel(weights.astype(np.float64), biases.astype(np.float64))
    else:
        model = train_ovr(
            train_x, train_y, TrainHyper(reg=config.reg, epochs=config.epochs, seed=config.seed)
        )
        fileio.write_model(model.weights, model.biases, model_path)
        weights, biases = fileio.read_model(model_path)
        model = LinearModel(weights.astype(np.float64), biases.astype(np.float64))

    predicted = np.array([predict(model, row)[0] for row in test_x])
    return tabulate(test_y, predicted, train_manifest.num_classes)


# -- benchmark harness -------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    mode: str
    pyramid: str
    accuracy: float
    encode_us: float  # median per-image encode time, microseconds
    encoding_len: int


def run_bench(
    modes: list[str],
    pyramids: list[str],
    config: PipelineConfig,
    train_manifest_path,
    test_manifest_path,
    work_dir,
    timing_reps: int = 5,
) -> list[BenchRow]:
    rows = []
    test_manifest = fileio.load_manifest(test_manifest_path)
    for mode in modes:
        for pyramid in pyramids:
            combo = replace(
                config, mode=mode, pyramid=None if pyramid == "none" else pyramid
            )
            report = run_pipeline(combo, train_manifest_path, test_manifest_path, work_dir)
            cache = Path(work_dir) / (
                f"cache_{_cache_key(combo, train_manifest_path, test_manifest_path)}"
            )
            dictionary = Dictionary(
                centers=fileio.read_dictionary(cache / "dictionary.vld").astype(np.float64)
            )
            transform = None
            if combo.whiten:
                mean, projection = fileio.read_whitening(cache / "transform.vlw")
                transform = WhiteningTransform(
                    mean.astype(np.float64), projection.astype(np.float64), 0.0
                )
            sample = read_feature_map(
                resolve_entry(test_manifest_path, test_manifest.entries[0][0])
            )
            times = []
            for _ in range(timing_reps):
                start = time.perf_counter()
                values = encode_entry(sample, dictionary, transform, combo)
                times.append((time.perf_counter() - start) * 1e6)
            rows.append(
                BenchRow(
                    mode=mode,
                    pyramid=pyramid,
                    accuracy=report.accuracy,
                    encode_us=float(np.median(times)),
                    encoding_len=int(values.size),
                )
            )
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["mode", "pyramid", "accuracy", "encode_us", "encoding_len"])
        for row in rows:
            writer.writerow(
                [row.mode, row.pyramid, f"{row.accuracy:.6f}", f"{row.encode_us:.1f}", row.encoding_len]
            )
