"""Command-line surface: fit, sample, balance, eval, difftest.

One root ``--seed`` per invocation (default from ``SYNTH_SEED``); every
stage derives its own sub-seed, every artifact embeds the seed and a
config echo, and identical invocations produce byte-identical files.
Failures exit non-zero with a machine-readable error JSON on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .encoding import LinearEncoder
from .evaluate import SynthesisConfig, compare_real_vs_synthetic
from .generate import assign_labels, synthesize
from .samplers import GeometrySampler, LatentGaussianMixture
from .seeding import derive_seed
from .stats import diff_feature_test, difftest_similarity

__all__ = ["main", "build_parser"]


def _default_seed() -> int:
    return int(os.environ.get("SYNTH_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synth",
        description="Fit a shared-code encoding, generate synthetic tables, "
        "and evaluate real-vs-synthetic fidelity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the encoding model (and optionally a sampler)")
    fit.add_argument("--data", action="append", required=True, metavar="CSV",
                     help="input table; repeat for multiple modalities")
    fit.add_argument("--label-column", default=None)
    fit.add_argument("--k-samples", type=int, default=2)
    fit.add_argument("--k-features", type=int, default=2)
    fit.add_argument("--sweeps", type=int, default=500)
    fit.add_argument("--rel-tol", type=float, default=1e-8)
    fit.add_argument("--ridge", type=float, default=1e-8)
    fit.add_argument("--no-standardize", action="store_true")
    fit.add_argument("--sampler", choices=["gmm", "geometry"], default=None,
                     help="also fit and store a latent sampler")
    fit.add_argument("--components", type=int, default=5, help="gmm components")
    fit.add_argument("--centroids", type=int, default=None, help="geometry centroids")
    fit.add_argument("--neighbors", type=int, default=None, help="geometry neighbors")
    fit.add_argument("--latent-modality", default=None,
                     help="modality whose latent rows the sampler learns (default: first)")
    fit.add_argument("--seed", type=int, default=_default_seed())
    fit.add_argument("--out", required=True, metavar="JSON")

    sample = sub.add_parser("sample", help="draw synthetic rows from a fitted model")
    sample.add_argument("--model", required=True, metavar="JSON")
    sample.add_argument("--count", type=int, required=True)
    sample.add_argument("--sampler", choices=["gmm", "geometry"], default=None,
                        help="fit this sampler if the model has none stored")
    sample.add_argument("--components", type=int, default=5)
    sample.add_argument("--centroids", type=int, default=None)
    sample.add_argument("--neighbors", type=int, default=None)
    sample.add_argument("--latent-modality", default=None)
    sample.add_argument("--modality", default=None,
                        help="modality to decode into the CSV (default: first)")
    sample.add_argument("--seed", type=int, default=_default_seed())
    sample.add_argument("--out", required=True, metavar="CSV")

    balance = sub.add_parser("balance", help="equal per-class subset of a labelled CSV")
    balance.add_argument("--data", required=True, metavar="CSV")
    balance.add_argument("--per-class", type=int, required=True)
    balance.add_argument("--label-column", default="label")
    balance.add_argument("--seed", type=int, default=_default_seed())
    balance.add_argument("--out", required=True, metavar="CSV")

    evaluate = sub.add_parser("eval", help="paired real-vs-synthetic regression protocol")
    evaluate.add_argument("--data", required=True, metavar="CSV")
    evaluate.add_argument("--target", required=True)
    evaluate.add_argument("--label-column", default=None)
    evaluate.add_argument("--repeats", type=int, default=20)
    evaluate.add_argument("--split-fraction", type=float, default=0.7)
    evaluate.add_argument("--sampler", choices=["gmm", "geometry", "identity"],
                          default="gmm")
    evaluate.add_argument("--k-samples", type=int, default=3)
    evaluate.add_argument("--k-features", type=int, default=3)
    evaluate.add_argument("--sweeps", type=int, default=200)
    evaluate.add_argument("--rel-tol", type=float, default=1e-8)
    evaluate.add_argument("--ridge", type=float, default=1e-8)
    evaluate.add_argument("--components", type=int, default=5)
    evaluate.add_argument("--centroids", type=int, default=None)
    evaluate.add_argument("--neighbors", type=int, default=None)
    evaluate.add_argument("--size-multiplier", type=int, default=10)
    evaluate.add_argument("--lambda-grid", default="0.001,0.01,0.1,1,10,100",
                          help="comma-separated ridge grid for the regressor")
    evaluate.add_argument("--folds", type=int, default=5)
    evaluate.add_argument("--export-splits", default=None, metavar="DIR",
                          help="write per-repeat train/test CSVs for external tools")
    evaluate.add_argument("--seed", type=int, default=_default_seed())
    evaluate.add_argument("--out", required=True, metavar="JSON")

    difftest = sub.add_parser("difftest",
                              help="correlation of per-feature differential statistics")
    difftest.add_argument("--real", required=True, metavar="A.csv,B.csv")
    difftest.add_argument("--synthetic", required=True, metavar="AS.csv,BS.csv")
    difftest.add_argument("--seed", type=int, default=_default_seed())
    difftest.add_argument("--out", required=True, metavar="JSON")

    return parser


def _json_safe(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _load_datasets(paths, label_column):
    datasets = []
    found_label = False
    for path in paths:
        header = io.read_csv_header(path)
        use_label = label_column if label_column in header else None
        found_label = found_label or use_label is not None
        datasets.append(io.load_csv(path, label_column=use_label))
    if label_column is not None and not found_label:
        raise ValueError(f"no input file has a column named {label_column!r}")
    return datasets


def _fit_sampler(kind, latent, args, seed):
    if kind == "gmm":
        return LatentGaussianMixture(n_components=args.components, seed=seed).fit(latent)
    return GeometrySampler(
        num_centroids=args.centroids, n_neighbors=args.neighbors, seed=seed
    ).fit(latent)


def _config_comment(args, skip=("out", "command")) -> str:
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return "# config: " + json.dumps(echo, sort_keys=True)


def cmd_fit(args) -> None:
    datasets = _load_datasets(args.data, args.label_column)
    encoder = LinearEncoder(
        k_samples=args.k_samples,
        k_features=args.k_features,
        max_sweeps=args.sweeps,
        rel_tol=args.rel_tol,
        ridge=args.ridge,
        standardize=not args.no_standardize,
        seed=derive_seed(args.seed, "fit"),
    ).fit(datasets)
    sampler = None
    if args.sampler is not None:
        latent = encoder.latent_rows(args.latent_modality or encoder.modalities_[0])
        sampler = _fit_sampler(args.sampler, latent, args, derive_seed(args.seed, "sampler"))
    run = _json_safe({"command": "fit", "seed": args.seed,
                      "args": {k: v for k, v in sorted(vars(args).items()) if k != "command"}})
    io.save_model(args.out, encoder, sampler, run=run)


def cmd_sample(args) -> None:
    model, stored = io.load_model(args.model)
    sampler = stored
    if sampler is None or (args.sampler is not None and args.sampler != sampler.kind):
        if args.sampler is None:
            raise ValueError(
                "model has no stored sampler; pass --sampler gmm|geometry"
            )
        latent = model.latent_rows(args.latent_modality or model.modalities_[0])
        sampler = _fit_sampler(args.sampler, latent, args,
                               derive_seed(args.seed, "sampler"))
    batch = synthesize(model, sampler, args.count, seed=derive_seed(args.seed, "sample"))
    labelled = any(model.label_info_.get(m) for m in model.modalities_)
    if labelled:
        batch = assign_labels(batch, model)
    modality = args.modality or model.modalities_[0]
    if modality not in model.modalities_:
        raise ValueError(
            f"unknown modality {modality!r}; fitted modalities are {model.modalities_}"
        )
    matrix = batch.decoded[modality]
    names = model.feature_names_[modality]
    info = model.label_info_.get(modality)
    keep = [i for i in range(len(names)) if not (info and i in info["columns"])]
    io.write_matrix_csv(
        args.out,
        [names[i] for i in keep],
        matrix[:, keep],
        labels=batch.labels,
        comments=[batch.provenance.as_comment(), _config_comment(args)],
    )


def cmd_balance(args) -> None:
    dataset = io.load_csv(args.data, label_column=args.label_column)
    rng = np.random.default_rng(derive_seed(args.seed, "balance"))
    selected = []
    for cls in sorted(set(dataset.label)):
        idx = np.flatnonzero(dataset.label == cls)
        if idx.size < args.per_class:
            raise ValueError(
                f"class {cls!r} has only {idx.size} rows, need {args.per_class}"
            )
        selected.append(np.sort(rng.choice(idx, size=args.per_class, replace=False)))
    order = np.concatenate(selected)
    keep = [i for i in range(dataset.n_features) if i not in dataset.label_columns]
    source_hash = hashlib.sha256(Path(args.data).read_bytes()).hexdigest()
    io.write_matrix_csv(
        args.out,
        [dataset.feature_names[i] for i in keep],
        dataset.values[np.ix_(order, keep)],
        labels=dataset.label[order],
        label_name=args.label_column,
        comments=[f"# provenance: balance,{args.seed},{source_hash}",
                  _config_comment(args)],
    )


def cmd_eval(args) -> None:
    dataset = io.load_csv(args.data, label_column=args.label_column)
    grid = tuple(float(v) for v in args.lambda_grid.split(","))
    config = SynthesisConfig(
        sampler=args.sampler,
        k_samples=args.k_samples,
        k_features=args.k_features,
        max_sweeps=args.sweeps,
        rel_tol=args.rel_tol,
        ridge=args.ridge,
        n_components=args.components,
        num_centroids=args.centroids,
        n_neighbors=args.neighbors,
        size_multiplier=args.size_multiplier,
    )
    recorder = None
    if args.export_splits is not None:
        out_dir = Path(args.export_splits)
        out_dir.mkdir(parents=True, exist_ok=True)

        def recorder(repeat, train_idx, test_idx):
            for tag, idx in (("train", train_idx), ("test", test_idx)):
                io.write_matrix_csv(
                    out_dir / f"repeat_{repeat:02d}_{tag}.csv",
                    dataset.feature_names,
                    dataset.values[idx],
                    labels=None if dataset.label is None else dataset.label[idx],
                    comments=[f"# provenance: eval-split,{args.seed},repeat-{repeat}-{tag}",
                              _config_comment(args)],
                )

    reports = compare_real_vs_synthetic(
        dataset,
        args.target,
        config,
        repeats=args.repeats,
        split_fraction=args.split_fraction,
        seed=args.seed,
        lambda_grid=grid,
        folds=args.folds,
        split_recorder=recorder,
    )
    payload = _json_safe({
        "seed": args.seed,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
        "protocol": {
            "note": "repeat count and synthetic size are artifact defaults, "
                    "not protocol constants",
            "repeats": args.repeats,
            "split_fraction": args.split_fraction,
            "size_multiplier": args.size_multiplier,
        },
        "reports": {metric: report.to_dict() for metric, report in reports.items()},
    })
    io.write_json(args.out, payload)


def cmd_difftest(args) -> None:
    real_paths = args.real.split(",")
    synth_paths = args.synthetic.split(",")
    if len(real_paths) != 2 or len(synth_paths) != 2:
        raise ValueError("--real and --synthetic each need exactly two CSV paths")
    real_a, real_b = (io.load_csv(p) for p in real_paths)
    synth_a, synth_b = (io.load_csv(p) for p in synth_paths)
    if real_a.feature_names != real_b.feature_names:
        raise ValueError("the two real groups have different feature columns")
    if synth_a.feature_names != synth_b.feature_names:
        raise ValueError("the two synthetic groups have different feature columns")
    real_result = diff_feature_test(real_a.values, real_b.values)
    synth_result = diff_feature_test(synth_a.values, synth_b.values)
    similarity = difftest_similarity(real_result, synth_result)
    excluded = [
        name
        for name, ra, sa in zip(
            real_a.feature_names,
            real_result.per_feature_statistic,
            synth_result.per_feature_statistic,
        )
        if not (np.isfinite(ra) and np.isfinite(sa))
    ]
    payload = _json_safe({
        "seed": args.seed,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
        "test": "per-feature unequal-variance t statistic",
        "similarity": similarity,
        "features": list(real_a.feature_names),
        "excluded_features": excluded,
        "real_statistics": [float(v) for v in real_result.per_feature_statistic],
        "synthetic_statistics": [float(v) for v in synth_result.per_feature_statistic],
    })
    io.write_json(args.out, payload)


_HANDLERS = {
    "fit": cmd_fit,
    "sample": cmd_sample,
    "balance": cmd_balance,
    "eval": cmd_eval,
    "difftest": cmd_difftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _HANDLERS[args.command](args)
    except Exception as exc:
        payload = {
            "error": {
                "operation": args.command,
                "type": type(exc).__name__,
                "message": str(exc),
            }
        }
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
