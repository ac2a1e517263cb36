"""Command-line front end.

Subcommands: ``synth``, ``pca``, ``train-tse``, ``train-tde``, ``eval-verify``,
``eval-identify``, and the all-in-one ``pipeline``. Every command that writes
artifacts also writes a ``key=value`` manifest next to them, with no
timestamps, so identical invocations produce identical files.

Exit codes: 0 success, 1 usage/validation errors, 2 I/O or file-format errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    LabeledDataset,
    Template,
    load_features,
    load_matrix,
    load_pairs,
    load_templates,
    save_features,
    save_matrix,
    save_pairs,
    save_templates,
    subset,
)
from .errors import DataFormatError, TripletEmbedError, ValidationError
from .evaluate import (
    all_pairs_protocol,
    class_templates,
    holdout_split,
    identify,
    score_protocol,
    verification_metrics,
)
from .metrics import roc
from .pca import pca_init
from .synth import SynthConfig, generate_clusters
from .train import TrainConfig, train_tde, train_tse


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_manifest(path, command: str, args, extra: dict | None = None) -> None:
    entries = {k: v for k, v in vars(args).items() if k != "func"}
    if extra:
        entries.update(extra)
    lines = [f"command={command}", f"tool_version={__version__}"]
    for key in sorted(entries):
        value = entries[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}")
    Path(path).write_text("".join(f"{ln}\n" for ln in lines))


def _load_dataset(args) -> LabeledDataset:
    return load_features(args.features, args.labels, fmt=args.format)


def _load_map(args):
    return None if args.raw else load_matrix(args.matrix)


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _far_label(target: float) -> str:
    return f"{target:.0e}"


def _verify_lines(header: str, counts: tuple[int, int], metrics: dict) -> list[str]:
    lines = [header]
    lines.append(f"n_genuine={counts[0]}")
    lines.append(f"n_impostor={counts[1]}")
    lines.append(f"eer={metrics['eer']:.6f}")
    for target in sorted(metrics["tar_at_far"]):
        lines.append(f"tar_at_far_{_far_label(target)}={metrics['tar_at_far'][target]:.6f}")
    lines.append("")
    return lines


def _summary_lines(header: str, per_split: list[dict]) -> list[str]:
    lines = [header]
    eers = np.asarray([m["eer"] for m in per_split])
    lines.append(f"eer_mean={eers.mean():.6f}")
    lines.append(f"eer_std={eers.std(ddof=1):.6f}")
    for target in sorted(per_split[0]["tar_at_far"]):
        vals = np.asarray([m["tar_at_far"][target] for m in per_split])
        label = _far_label(target)
        lines.append(f"tar_at_far_{label}_mean={vals.mean():.6f}")
        lines.append(f"tar_at_far_{label}_std={vals.std(ddof=1):.6f}")
    lines.append("")
    return lines


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_synth(args) -> int:
    cfg = SynthConfig(
        num_classes=args.classes,
        samples_per_class=args.per_class,
        dim=args.dim,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    ds = generate_clusters(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_features(ds, out / "features.bin", out / "labels.txt", fmt="binary")
    _write_manifest(
        out / "manifest.txt",
        "synth",
        args,
        {"out_features": out / "features.bin", "out_labels": out / "labels.txt"},
    )
    print(f"wrote {ds.num_samples} x {ds.dim} features to {out / 'features.bin'}")
    return 0


def _cmd_pca(args) -> int:
    ds = _load_dataset(args)
    w = pca_init(ds, args.dout)
    save_matrix(w, args.out)
    _write_manifest(f"{args.out}.manifest", "pca", args)
    print(f"wrote {w.shape[0]} x {w.shape[1]} PCA matrix to {args.out}")
    return 0


def _train_command(args, name: str, trainer) -> int:
    ds = _load_dataset(args)
    cfg = TrainConfig(
        d_out=args.dout,
        alpha=args.alpha,
        eta=args.eta,
        max_iter=args.iters,
        negative_pool=args.pool,
        seed=args.seed,
    )
    w, report = trainer(ds, cfg)
    save_matrix(w, args.out)
    if args.loss_trace:
        Path(args.loss_trace).write_text(
            "".join(f"{it},{val:.10g}\n" for it, val in report.loss_trace)
        )
    _write_manifest(f"{args.out}.manifest", name, args)
    final = report.loss_trace[-1][1] if report.loss_trace else float("nan")
    print(
        f"{name}: {report.iterations_run} iterations, "
        f"{report.violations_updated} updates, final window loss {final:.6f}"
    )
    return 0


def _cmd_train_tse(args) -> int:
    return _train_command(args, "train-tse", train_tse)


def _cmd_train_tde(args) -> int:
    return _train_command(args, "train-tde", train_tde)


def _cmd_eval_verify(args) -> int:
    w = _load_map(args)
    ds = _load_dataset(args)
    templates = load_templates(args.templates)
    modes = ["inner", "cosine"] if args.mode == "both" else [args.mode]
    if args.roc_csv and (len(args.pairs) > 1 or len(modes) > 1):
        raise ValidationError("--roc-csv needs a single pairs file and a single mode")

    lines: list[str] = []
    for mode in modes:
        per_split = []
        for pairs_path in args.pairs:
            pairs = load_pairs(pairs_path)
            scores = score_protocol(w, pairs, templates, ds, mode=mode)
            metrics = verification_metrics(scores)
            per_split.append(metrics)
            lines += _verify_lines(
                f"[verify pairs={pairs_path} mode={mode}]",
                (scores.genuine.size, scores.impostor.size),
                metrics,
            )
            if args.roc_csv:
                curve = roc(scores)
                Path(args.roc_csv).write_text(
                    "".join(f"{f:.10g},{t:.10g}\n" for f, t in zip(curve.far, curve.tar))
                )
        if len(per_split) > 1:
            lines += _summary_lines(
                f"[verify-summary mode={mode} splits={len(per_split)}]", per_split
            )
    text = "".join(f"{ln}\n" for ln in lines)
    _emit(text, args.out)
    if args.out:
        _write_manifest(f"{args.out}.manifest", "eval-verify", args)
    return 0


def _cmd_eval_identify(args) -> int:
    w = _load_map(args)
    ds = _load_dataset(args)
    if len(args.gallery) != len(args.probes):
        raise ValidationError("--gallery and --probes need the same number of files")
    try:
        ranks = [int(tok) for tok in args.ranks.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"--ranks must be comma-separated integers: {exc}") from exc

    lines: list[str] = []
    per_split = []
    for gpath, ppath in zip(args.gallery, args.probes):
        gallery = load_templates(gpath)
        probes = load_templates(ppath)
        acc = identify(w, gallery, probes, ds, k_list=ranks, mode=args.mode)
        per_split.append(acc)
        lines.append(f"[identify gallery={gpath} probes={ppath} mode={args.mode}]")
        for k in ranks:
            lines.append(f"rank_{k}={acc[k]:.6f}")
        lines.append("")
    if len(per_split) > 1:
        lines.append(f"[identify-summary mode={args.mode} splits={len(per_split)}]")
        for k in ranks:
            vals = np.asarray([acc[k] for acc in per_split])
            lines.append(f"rank_{k}_mean={vals.mean():.6f}")
            lines.append(f"rank_{k}_std={vals.std(ddof=1):.6f}")
        lines.append("")
    text = "".join(f"{ln}\n" for ln in lines)
    _emit(text, args.out)
    if args.out:
        _write_manifest(f"{args.out}.manifest", "eval-identify", args)
    return 0


def _cmd_pipeline(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cfg = SynthConfig(
        num_classes=args.classes,
        samples_per_class=args.per_class,
        dim=args.dim,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    ds = generate_clusters(cfg)
    save_features(ds, out / "features.bin", out / "labels.txt", fmt="binary")

    train_idx, held_idx = holdout_split(ds, args.holdout)
    train_ds = subset(ds, train_idx)

    tcfg = TrainConfig(
        d_out=args.dout,
        alpha=args.alpha,
        eta=args.eta,
        max_iter=args.iters,
        negative_pool=args.pool,
        seed=args.train_seed,
    )
    w_tse, rep_tse = train_tse(train_ds, tcfg)
    w_tde, rep_tde = train_tde(train_ds, tcfg)
    save_matrix(w_tse, out / "w_tse.bin")
    save_matrix(w_tde, out / "w_tde.bin")

    # All template files index rows of the saved full dataset, so they can be
    # replayed with eval-verify/eval-identify against features.bin.
    templates = {int(i): Template(int(i), (int(i),)) for i in held_idx}
    pairs = all_pairs_protocol(templates, ds)
    save_templates(templates, out / "eval_templates.txt")
    save_pairs(pairs, out / "eval_pairs.txt")
    gallery = class_templates(ds, train_idx)
    save_templates(gallery, out / "gallery_templates.txt")
    probes = templates

    lines: list[str] = []
    summary = {}
    for method, w in (("raw", None), ("tse", w_tse), ("tde", w_tde)):
        scores = score_protocol(w, pairs, templates, ds, mode=args.mode)
        metrics = verification_metrics(scores)
        summary[method] = metrics["eer"]
        lines += _verify_lines(
            f"[verify method={method} mode={args.mode}]",
            (scores.genuine.size, scores.impostor.size),
            metrics,
        )
        acc = identify(w, gallery, probes, ds, k_list=(1, 5), mode="cosine")
        lines.append(f"[identify method={method} mode=cosine]")
        lines.append(f"rank_1={acc[1]:.6f}")
        lines.append(f"rank_5={acc[5]:.6f}")
        lines.append("")

    (out / "report.txt").write_text("".join(f"{ln}\n" for ln in lines))
    _write_manifest(
        out / "manifest.txt",
        "pipeline",
        args,
        {
            "tse_updates": rep_tse.violations_updated,
            "tde_updates": rep_tde.violations_updated,
        },
    )
    print(
        f"eer {args.mode}: raw={summary['raw']:.6f} "
        f"tse={summary['tse']:.6f} tde={summary['tde']:.6f}"
    )
    print(f"report written to {out / 'report.txt'}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_dataset_flags(p) -> None:
    p.add_argument("--features", required=True, help="feature file path")
    p.add_argument("--labels", required=True, help="labels file path")
    p.add_argument("--format", choices=("binary", "csv"), default="binary",
                   help="feature file format (default binary)")


def _add_matrix_source(p) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--matrix", help="embedding matrix file")
    group.add_argument("--raw", action="store_true",
                       help="identity embedding: score raw features")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triplet-embed",
                     description="Triplet-constraint linear embeddings and verification metrics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="generate a synthetic clustered dataset")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("pca", help="write the PCA initialization matrix")
    _add_dataset_flags(p)
    p.add_argument("--dout", type=int, default=128)
    p.add_argument("--out", required=True, help="output matrix path")
    p.set_defaults(func=_cmd_pca)

    for name, func in (("train-tse", _cmd_train_tse), ("train-tde", _cmd_train_tde)):
        p = sub.add_parser(name, help=f"{name.split('-')[1].upper()} training")
        _add_dataset_flags(p)
        p.add_argument("--alpha", type=float, default=0.1, help="hinge margin (default 0.1)")
        p.add_argument("--eta", type=float, default=0.01, help="learning rate (default 0.01)")
        p.add_argument("--dout", type=int, default=128)
        p.add_argument("--iters", type=int, default=50_000)
        p.add_argument("--pool", type=int, default=2000, help="negative pool size")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", required=True, help="output matrix path")
        p.add_argument("--loss-trace", help="optional CSV of iteration,mean_loss windows")
        p.set_defaults(func=func)

    p = sub.add_parser("eval-verify", help="verification metrics on template pairs")
    _add_matrix_source(p)
    _add_dataset_flags(p)
    p.add_argument("--templates", required=True, help="template map file")
    p.add_argument("--pairs", required=True, nargs="+",
                   help="pair protocol file(s); several files = splits mode (mean +- std)")
    p.add_argument("--mode", choices=("inner", "cosine", "both"), default="inner")
    p.add_argument("--roc-csv", help="write far,tar lines (single pairs file and mode only)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=_cmd_eval_verify)

    p = sub.add_parser("eval-identify", help="closed-set rank-k identification")
    _add_matrix_source(p)
    _add_dataset_flags(p)
    p.add_argument("--gallery", required=True, nargs="+", help="gallery template map file(s)")
    p.add_argument("--probes", required=True, nargs="+", help="probe template map file(s)")
    p.add_argument("--mode", choices=("inner", "cosine"), default="cosine")
    p.add_argument("--ranks", default="1,5", help="comma-separated ranks (default 1,5)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=_cmd_eval_identify)

    p = sub.add_parser("pipeline", help="synth -> train (TSE and TDE) -> evaluate, in one run")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=7, help="synthesis seed")
    p.add_argument("--holdout", type=int, default=10, help="held-out samples per class")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--dout", type=int, default=128)
    p.add_argument("--iters", type=int, default=50_000)
    p.add_argument("--pool", type=int, default=2000)
    p.add_argument("--train-seed", type=int, default=1)
    p.add_argument("--mode", choices=("inner", "cosine"), default="inner",
                   help="verification scoring mode (default inner)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def run(argv) -> int:
    """Parse and execute one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return int(args.func(args))
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TripletEmbedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
