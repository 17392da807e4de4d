"""Command-line interface.

Subcommands: ``generate`` synthetic datasets, ``train`` one prediction
head, ``eval`` a checkpoint against a dataset, ``sweep`` a grid of
(n_classes, n_tasks) cells, and ``decode`` a votes file. Every artifact
embeds the resolved configuration and seed; re-running with the same
config and seed reproduces artifacts byte for byte (figures aside, which
carry the same data but go through matplotlib).
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import backbone, data, decoder, figures, metrics
from .backbone import (
    HEAD_CIRCLE_ANGULAR,
    HEAD_CIRCLE_HUBER,
    HEAD_DISCRETE_MEANSHIFT,
    HEADS,
)
from .encoding import build_scheme
from .errors import (
    ConvergenceError,
    DegenerateVectorError,
    InvalidConfigError,
    OrientestError,
)
from .losses import softmax_votes
from .decoder import MeanShiftConfig, decode_atan2, decode_meanshift, votes_from_softmax

TRAIN_DEFAULTS = {
    "head": HEAD_DISCRETE_MEANSHIFT,
    "hidden": [48],
    "init_std": 0.05,
    "n_classes": 8,
    "n_tasks": 9,
    "lr": 0.01,
    "iterations": 2000,
    "batch_size": 32,
    "momentum": 0.9,
    "weight_decay": 0.0005,
    "lr_drop_at": None,
    "lr_drop_factor": 10.0,
    "clip_norm": None,
    "seed": 0,
}


def _dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, sort_keys=True, indent=2)
        f.write("\n")


def _config_hash(config):
    text = json.dumps(config, sort_keys=True)
    return hashlib.sha1(text.encode()).hexdigest()[:8]


def _run_dir(base_arg, config, kind):
    if base_arg:
        path = Path(base_arg)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = Path("runs") / f"{stamp}-{kind}-{_config_hash(config)}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_train_config(args):
    """defaults <- config file <- explicit flags, in that order."""
    config = dict(TRAIN_DEFAULTS)
    config["dataset"] = None
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            loaded = json.load(f)
        unknown = set(loaded) - set(config)
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key in config:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if config["dataset"] is None:
        raise InvalidConfigError("a dataset path is required (--dataset or config file)")
    if config["head"] not in HEADS:
        raise InvalidConfigError(f"head must be one of {HEADS}, got {config['head']!r}")
    config["hidden"] = [int(h) for h in config["hidden"]]
    return config


def _train_from_config(config):
    dataset = data.load_dataset(config["dataset"])
    scheme = None
    if config["head"] == HEAD_DISCRETE_MEANSHIFT:
        scheme = build_scheme(config["n_classes"], config["n_tasks"])
        out_dim = scheme.total_orientations
    else:
        out_dim = 2
    layer_sizes = [dataset.feature_dim] + config["hidden"] + [out_dim]
    spec = backbone.NetworkSpec(
        layer_sizes=tuple(layer_sizes), init_std=config["init_std"]
    )
    model = backbone.init_model(spec, config["seed"])
    lr_drop = None
    if config["lr_drop_at"] is not None:
        lr_drop = (int(config["lr_drop_at"]), float(config["lr_drop_factor"]))
    train_cfg = backbone.TrainConfig(
        learning_rate=config["lr"],
        iterations=config["iterations"],
        batch_size=config["batch_size"],
        momentum=config["momentum"],
        weight_decay=config["weight_decay"],
        lr_drop=lr_drop,
        max_grad_norm=config["clip_norm"],
        seed=config["seed"],
    )
    model, log = backbone.train(model, dataset, config["head"], train_cfg, scheme=scheme)
    return model, log, scheme


def _write_train_artifacts(out_dir, config, model, log, scheme, want_figures):
    _dump_json(config, out_dir / "config.json")
    backbone.save_checkpoint(
        model, out_dir / "checkpoint.json", head=config["head"], scheme=scheme
    )
    with open(out_dir / "loss_log.tsv", "w", encoding="utf-8") as f:
        f.write("iteration\tloss\tlr\n")
        for it, loss, lr in zip(log.iterations, log.losses, log.lrs):
            f.write(f"{it}\t{loss!r}\t{lr!r}\n")
    _dump_json(
        {
            "initial_loss": log.losses[0],
            "final_loss": log.losses[-1],
            "iterations": len(log.iterations),
            "skipped_samples": log.skipped_samples,
            "config_hash": _config_hash(config),
        },
        out_dir / "train_summary.json",
    )
    if want_figures:
        figures.save_loss_curve(
            log,
            out_dir / "loss_curve.png",
            note=f"[{config['head']} seed={config['seed']} cfg={_config_hash(config)}]",
        )


def cmd_generate(args):
    spec = data.SynthSpec(
        count=args.count,
        seed=args.seed,
        image_side=args.side,
        shape=args.shape,
        noise_std=args.noise_std,
        stratified=args.stratified,
    )
    dataset = data.generate_synthetic(spec)
    if args.mirror:
        dataset = data.mirror_augment(dataset)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data.save_dataset(dataset, out)
    manifest = {
        "count": spec.count,
        "seed": spec.seed,
        "image_side": spec.image_side,
        "shape": spec.shape,
        "noise_std": spec.noise_std,
        "stratified": spec.stratified,
        "mirror": bool(args.mirror),
        "samples_written": len(dataset),
    }
    _dump_json(manifest, str(out) + ".manifest.json")
    print(f"wrote {len(dataset)} samples to {out}")
    return 0


def cmd_train(args):
    config = _resolve_train_config(args)
    out_dir = _run_dir(args.out, config, "train")
    model, log, scheme = _train_from_config(config)
    _write_train_artifacts(out_dir, config, model, log, scheme, not args.no_figures)
    print(
        f"trained {config['head']} for {config['iterations']} iterations: "
        f"loss {log.losses[0]:.4f} -> {log.losses[-1]:.4f} ({out_dir})"
    )
    return 0


def predict_angles(model, head, dataset, scheme=None, meanshift_config=None):
    """Forward the dataset and decode each output to an angle.

    Returns (angles array, fallback counter). Degenerate regression
    outputs and non-converged mean-shift runs fall back to the best
    available angle and are counted rather than fatal.
    """
    outputs = backbone.forward(model, dataset.features)
    fallbacks = 0
    angles = np.empty(len(dataset))
    if head in (HEAD_CIRCLE_HUBER, HEAD_CIRCLE_ANGULAR):
        for i in range(len(dataset)):
            try:
                angles[i] = decode_atan2(outputs[i])
            except DegenerateVectorError:
                angles[i] = 0.0
                fallbacks += 1
    else:
        cfg = meanshift_config or MeanShiftConfig()
        for i in range(len(dataset)):
            probs = softmax_votes(outputs[i].reshape(scheme.n_tasks, scheme.n_classes))
            votes = votes_from_softmax(probs, scheme)
            try:
                angles[i] = decode_meanshift(votes, cfg)
            except ConvergenceError as err:
                angles[i] = err.best_angle
                fallbacks += 1
    return angles, fallbacks


def _eval_checkpoint(checkpoint_path, dataset_path, decoder_kind, ms_config):
    model, meta = backbone.load_checkpoint(checkpoint_path)
    head = meta["head"]
    scheme = meta["scheme"]
    if head is None:
        raise InvalidConfigError(f"{checkpoint_path} does not record a head")
    wants_meanshift = head == HEAD_DISCRETE_MEANSHIFT
    if decoder_kind != "auto":
        if (decoder_kind == "meanshift") != wants_meanshift:
            raise InvalidConfigError(
                f"decoder {decoder_kind!r} does not match head {head!r}"
            )
    dataset = data.load_dataset(dataset_path)
    preds, fallbacks = predict_angles(
        model, head, dataset, scheme=scheme, meanshift_config=ms_config
    )
    errors = metrics.angular_errors(preds, dataset.angles)
    report = metrics.evaluate(preds, dataset.angles)
    return report, errors, preds, dataset, head, fallbacks


def cmd_eval(args):
    ms_config = MeanShiftConfig(
        nu=args.nu, tolerance=args.tolerance, max_iterations=args.max_iterations
    )
    report, errors, preds, dataset, head, fallbacks = _eval_checkpoint(
        args.checkpoint, args.dataset, args.decoder, ms_config
    )
    eval_config = {
        "checkpoint": str(args.checkpoint),
        "dataset": str(args.dataset),
        "head": head,
        "decoder": {
            "kind": "meanshift" if head == HEAD_DISCRETE_MEANSHIFT else "atan2",
            "nu": args.nu,
            "tolerance": args.tolerance,
            "max_iterations": args.max_iterations,
        },
    }
    out_dir = _run_dir(args.out, eval_config, "eval")
    _dump_json(eval_config, out_dir / "eval_config.json")
    _dump_json(
        {"metrics": report.to_dict(), "fallback_decodes": fallbacks, **eval_config},
        out_dir / "report.json",
    )
    with open(out_dir / "report.txt", "w", encoding="utf-8") as f:
        f.write(report.to_text())
    with open(out_dir / "per_sample_errors.tsv", "w", encoding="utf-8") as f:
        f.write("index\ttrue_deg\tpred_deg\terror_deg\n")
        for i, (t, p, e) in enumerate(zip(dataset.angles, preds, errors)):
            f.write(f"{i}\t{t!r}\t{p!r}\t{e!r}\n")
    if not args.no_figures:
        figures.save_error_histogram(
            errors,
            out_dir / "error_histogram.png",
            note=f"[{head} cfg={_config_hash(eval_config)}]",
        )
    print(report.to_text(), end="")
    print(f"report written to {out_dir}")
    return 0


def cmd_sweep(args):
    ns = [int(v) for v in args.n_list.split(",")]
    ms = [int(v) for v in args.m_list.split(",")]
    base = _resolve_train_config(args)
    if base["head"] != HEAD_DISCRETE_MEANSHIFT:
        raise InvalidConfigError("sweep cells discretize, so the head must be discrete-meanshift")
    sweep_config = dict(base)
    sweep_config.update({"n_list": ns, "m_list": ms, "test_dataset": args.test_dataset})
    out_dir = _run_dir(args.out, sweep_config, "sweep")
    _dump_json(sweep_config, out_dir / "sweep_config.json")

    ms_config = MeanShiftConfig(
        nu=args.nu, tolerance=args.tolerance, max_iterations=args.max_iterations
    )
    cells = [(n, m) for n in ns for m in ms]
    results = []
    failed = 0
    for n, m in cells:
        cell_config = dict(base)
        cell_config["n_classes"] = n
        cell_config["n_tasks"] = m
        cell_dir = out_dir / f"cell_N{n}_M{m}"
        cell_dir.mkdir(exist_ok=True)
        try:
            model, log, scheme = _train_from_config(cell_config)
            _write_train_artifacts(
                cell_dir, cell_config, model, log, scheme, want_figures=False
            )
            test_set = data.load_dataset(args.test_dataset)
            preds, fallbacks = predict_angles(
                model, base["head"], test_set, scheme=scheme, meanshift_config=ms_config
            )
            report = metrics.evaluate(preds, test_set.angles)
            results.append(
                {
                    "n_classes": n,
                    "n_tasks": m,
                    "metrics": report.to_dict(),
                    "fallback_decodes": fallbacks,
                }
            )
        except (OrientestError, OSError) as err:
            failed += 1
            results.append({"n_classes": n, "n_tasks": m, "error": str(err)})
        print(f"cell N={n} M={m}: {results[-1].get('metrics', results[-1])}")

    _dump_json({"config": sweep_config, "cells": results}, out_dir / "sweep_results.json")

    # table mirroring the paper-style layout: metric rows, one column per cell
    metric_rows = [
        ("MeanAE", "mean_ae"),
        ("MedianAE", "median_ae"),
        ("Accuracy-22.5", "acc_22_5"),
        ("Accuracy-45", "acc_45"),
    ]
    with open(out_dir / "sweep_table.tsv", "w", encoding="utf-8") as f:
        f.write("metric\t" + "\t".join(f"N={r['n_classes']},M={r['n_tasks']}" for r in results) + "\n")
        for label, key in metric_rows:
            cells_text = [
                repr(r["metrics"][key]) if "metrics" in r else "error" for r in results
            ]
            f.write(label + "\t" + "\t".join(cells_text) + "\n")
    if not args.no_figures:
        ok = [r for r in results if "metrics" in r]
        if ok:
            figures.save_sweep_chart(
                [(r["n_classes"], r["n_tasks"]) for r in ok],
                [r["metrics"]["mean_ae"] for r in ok],
                out_dir / "sweep_chart.png",
                note=f"[seed={base['seed']} cfg={_config_hash(sweep_config)}]",
            )
    print(f"sweep finished: {len(cells) - failed}/{len(cells)} cells ok ({out_dir})")
    return 1 if failed else 0


def cmd_decode(args):
    votes = data.load_votes(args.votes)
    cfg = MeanShiftConfig(
        nu=args.nu, tolerance=args.tolerance, max_iterations=args.max_iterations
    )
    angle = decode_meanshift(votes, cfg)
    print(f"decoded_angle_deg: {angle!r}")
    if args.out:
        _dump_json(
            {
                "decoded_angle_deg": angle,
                "votes": str(args.votes),
                "nu": args.nu,
                "tolerance": args.tolerance,
                "max_iterations": args.max_iterations,
            },
            args.out,
        )
    return 0


def _add_train_flags(p, require_dataset):
    p.add_argument("--config", help="JSON file with any of the training keys")
    p.add_argument("--dataset", required=require_dataset, help="training dataset file")
    p.add_argument("--head", choices=HEADS)
    p.add_argument("--hidden", type=lambda s: [int(v) for v in s.split(",")],
                   help="comma-separated hidden layer sizes, e.g. 64,32")
    p.add_argument("--init-std", dest="init_std", type=float)
    p.add_argument("--n-classes", dest="n_classes", type=int)
    p.add_argument("--n-tasks", dest="n_tasks", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--momentum", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--lr-drop-at", dest="lr_drop_at", type=int)
    p.add_argument("--lr-drop-factor", dest="lr_drop_factor", type=float)
    p.add_argument("--clip-norm", dest="clip_norm", type=float)
    p.add_argument("--seed", type=int)


def _add_meanshift_flags(p):
    p.add_argument("--nu", type=float, default=decoder.DEFAULT_NU)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=1000)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orientest",
        description="Train, decode, and compare continuous orientation predictors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render a synthetic oriented-shape dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", choices=data.SHAPES, default=data.SHAPE_WEDGE)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.0)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--mirror", action="store_true",
                   help="append left-right mirrored copies (angle -> 360 - angle)")
    p.add_argument("--out", required=True, help="dataset file to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one prediction head")
    _add_train_flags(p, require_dataset=False)
    p.add_argument("--out", help="run directory (default: runs/<stamp>-<hash>)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--decoder", choices=["auto", "atan2", "meanshift"], default="auto")
    _add_meanshift_flags(p)
    p.add_argument("--out", help="report directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train/evaluate a grid of (N, M) cells")
    _add_train_flags(p, require_dataset=False)
    p.add_argument("--test-dataset", dest="test_dataset", required=True)
    p.add_argument("--n-list", dest="n_list", required=True, help="e.g. 8,72")
    p.add_argument("--m-list", dest="m_list", required=True, help="e.g. 1,3,9")
    _add_meanshift_flags(p)
    p.add_argument("--out", help="sweep directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decode", help="mean-shift decode a votes file")
    p.add_argument("--votes", required=True)
    _add_meanshift_flags(p)
    p.add_argument("--out", help="optional JSON result file")
    p.set_defaults(func=cmd_decode)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OrientestError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
