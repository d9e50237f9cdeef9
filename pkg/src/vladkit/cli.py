"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, dimension
mismatches, and everything else raised as a VladkitError).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .classifier import LinearModel, TrainHyper, predict, tabulate, train_ovr
from .codebook import Dictionary, kmeans_train, subsample
from .errors import VladkitError
from .fileio import FeatureMap, read_feature_map, resolve_entry
from .pipeline import (
    PipelineConfig,
    config_from_strings,
    encode_entry,
    load_config,
    load_descriptor_stack,
    run_bench,
    run_pipeline,
    write_bench_csv,
    _DEFAULTS,
)
from .synth import SynthSpec, split_manifest, synth_dataset
from .whitening import WhiteningTransform, apply_whitening_batch, fit_whitening


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _add_encoder_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", default="hard", choices=["hard", "sa", "lsa", "llc", "llc-approx"])
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument(
        "--norm-scheme",
        default="intra-then-global",
        choices=["intra-then-global", "global-only", "signed-sqrt-then-global"],
    )
    p.add_argument("--pyramid", default=None, help="preset a|b|c or custom RxC,RxC,...")


def _encoder_config(args) -> PipelineConfig:
    return PipelineConfig(
        mode=args.mode,
        beta=args.beta,
        knn=args.knn,
        lam=args.lam,
        sigma=args.sigma,
        norm_scheme=args.norm_scheme,
        pyramid=args.pyramid,
    )


def _load_transform(path) -> WhiteningTransform:
    mean, projection = fileio.read_whitening(path)
    return WhiteningTransform(
        mean=mean.astype(np.float64), projection=projection.astype(np.float64), epsilon=0.0
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vladkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic feature-map dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--synth-mode", default="descriptor-signal",
                   choices=["descriptor-signal", "spatial-signal"])
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("split", help="seeded n-per-class train/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)

    p = sub.add_parser("preprocess", help="fit or apply a whitening transform")
    pp = p.add_subparsers(dest="preprocess_command", required=True, parser_class=_Parser)
    fit = pp.add_parser("fit")
    fit.add_argument("--manifest", required=True)
    fit.add_argument("--out", required=True)
    fit.add_argument("--dim", type=int, default=None)
    fit.add_argument("--epsilon", type=float, default=None)
    fit.add_argument("--subsample", type=int, default=None)
    fit.add_argument("--seed", type=int, default=0)
    apply_p = pp.add_parser("apply")
    apply_p.add_argument("--transform", required=True)
    apply_p.add_argument("--in", dest="input", required=True)
    apply_p.add_argument("--out", required=True)

    p = sub.add_parser("codebook", help="learn a visual-word dictionary")
    cb = p.add_subparsers(dest="codebook_command", required=True, parser_class=_Parser)
    train_p = cb.add_parser("train")
    train_p.add_argument("--manifest", required=True)
    train_p.add_argument("--transform", default=None)
    train_p.add_argument("--words", type=int, default=64)
    train_p.add_argument("--out", required=True)
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--max-iters", type=int, default=100)
    train_p.add_argument("--tol", type=float, default=1e-4)
    train_p.add_argument("--subsample", type=int, default=None)

    p = sub.add_parser("encode", help="encode one feature map")
    p.add_argument("--dict", dest="dictionary", required=True)
    p.add_argument("--transform", default=None)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_encoder_flags(p)

    p = sub.add_parser("train", help="train a one-vs-rest linear model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--dict", dest="dictionary", required=True)
    p.add_argument("--transform", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    _add_encoder_flags(p)

    p = sub.add_parser("evaluate", help="evaluate a model on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dict", dest="dictionary", required=True)
    p.add_argument("--transform", default=None)
    p.add_argument("--confusion-out", default=None)
    _add_encoder_flags(p)

    p = sub.add_parser("bench", help="cross-product benchmark of modes x pyramids")
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--modes", required=True, help="comma-separated assignment modes")
    p.add_argument("--pyramids", required=True, help="comma-separated, 'none' allowed")
    p.add_argument("--words", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--work-dir", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--work-dir", required=True)

    return parser


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        num_classes=args.classes,
        images_per_class=args.per_class,
        grid_h=args.height,
        grid_w=args.width,
        dim=args.dim,
        mode=args.synth_mode,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    manifest = synth_dataset(spec, args.out_dir)
    print(f"wrote {len(manifest.entries)} feature maps to {args.out_dir}")
    return 0


def _cmd_split(args) -> int:
    manifest = fileio.load_manifest(args.manifest)
    train, test = split_manifest(manifest, args.per_class, args.seed)
    fileio.save_manifest(train, args.out_train)
    fileio.save_manifest(test, args.out_test)
    print(f"train={len(train.entries)} test={len(test.entries)}")
    return 0


def _cmd_preprocess(args) -> int:
    if args.preprocess_command == "fit":
        manifest = fileio.load_manifest(args.manifest)
        descriptors = load_descriptor_stack(manifest, args.manifest)
        if args.subsample is not None:
            descriptors = subsample(descriptors, args.subsample, args.seed)
        transform = fit_whitening(descriptors, args.dim, args.epsilon)
        fileio.write_whitening(transform.mean, transform.projection, args.out)
        print(f"fit whitening {transform.input_dim}->{transform.output_dim}")
        return 0
    transform = _load_transform(args.transform)
    fmap = read_feature_map(args.input)
    whitened = apply_whitening_batch(transform, fmap.descriptors().astype(np.float64))
    out = whitened.reshape(fmap.height, fmap.width, transform.output_dim)
    fileio.write_feature_map(FeatureMap(out.astype(np.float32)), args.out)
    return 0


def _cmd_codebook(args) -> int:
    manifest = fileio.load_manifest(args.manifest)
    descriptors = load_descriptor_stack(manifest, args.manifest)
    if args.transform is not None:
        descriptors = apply_whitening_batch(_load_transform(args.transform), descriptors)
    cap = args.subsample if args.subsample is not None else 256 * args.words
    descriptors = subsample(descriptors, cap, args.seed)
    dictionary, report = kmeans_train(
        descriptors, args.words, args.max_iters, args.tol, args.seed
    )
    fileio.write_dictionary(dictionary.centers, args.out)
    print(
        f"trained {dictionary.num_words} words in {report.iterations} iterations"
        f" (converged={report.converged})"
    )
    return 0


def _cmd_encode(args) -> int:
    dictionary = Dictionary(
        centers=fileio.read_dictionary(args.dictionary).astype(np.float64)
    )
    transform = _load_transform(args.transform) if args.transform else None
    fmap = read_feature_map(args.input)
    values = encode_entry(fmap, dictionary, transform, _encoder_config(args))
    fileio.write_encoding(values, args.out)
    return 0


def _encode_manifest_with(args, dictionary, transform):
    config = _encoder_config(args)
    manifest = fileio.load_manifest(args.manifest)
    encodings, labels = [], []
    for rel, label in manifest.entries:
        fmap = read_feature_map(resolve_entry(args.manifest, rel))
        encodings.append(encode_entry(fmap, dictionary, transform, config))
        labels.append(label)
    return np.stack(encodings), np.array(labels, dtype=int), manifest


def _cmd_train(args) -> int:
    dictionary = Dictionary(
        centers=fileio.read_dictionary(args.dictionary).astype(np.float64)
    )
    transform = _load_transform(args.transform) if args.transform else None
    x, y, _ = _encode_manifest_with(args, dictionary, transform)
    model = train_ovr(x, y, TrainHyper(reg=args.reg, epochs=args.epochs, seed=args.seed))
    fileio.write_model(model.weights, model.biases, args.out)
    print(f"trained model: {model.num_classes} classes, dim {model.dim}")
    return 0


def _cmd_evaluate(args) -> int:
    dictionary = Dictionary(
        centers=fileio.read_dictionary(args.dictionary).astype(np.float64)
    )
    transform = _load_transform(args.transform) if args.transform else None
    weights, biases = fileio.read_model(args.model)
    model = LinearModel(weights.astype(np.float64), biases.astype(np.float64))
    x, y, manifest = _encode_manifest_with(args, dictionary, transform)
    predicted = np.array([predict(model, row)[0] for row in x])
    report = tabulate(y, predicted, max(manifest.num_classes, model.num_classes))
    print(f"accuracy={report.accuracy}")
    lines = "\n".join(",".join(str(v) for v in row) for row in report.confusion)
    if args.confusion_out:
        Path(args.confusion_out).write_text(lines + "\n")
    else:
        print(lines)
    return 0


def _cmd_bench(args) -> int:
    config = config_from_strings({**_DEFAULTS, "words": str(args.words), "seed": str(args.seed)})
    rows = run_bench(
        args.modes.split(","),
        args.pyramids.split(","),
        config,
        args.train_manifest,
        args.test_manifest,
        args.work_dir,
    )
    write_bench_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    config = load_config(args.config)
    report = run_pipeline(config, args.train_manifest, args.test_manifest, args.work_dir)
    print(f"accuracy={report.accuracy}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "split": _cmd_split,
    "preprocess": _cmd_preprocess,
    "codebook": _cmd_codebook,
    "encode": _cmd_encode,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "bench": _cmd_bench,
    "pipeline": _cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args)
    except (VladkitError, OSError) as exc:
        print(f"vladkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
