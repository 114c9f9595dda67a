"""Command-line entry point.

Subcommands: sieve, render, blocks, split, mask, eval, baseline, density,
loss, report.  Any operation error exits non-zero with a message; --jobs
only changes scheduling, never outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import pipeline as pl
from .metrics import (
    LossParams,
    bce,
    classification_report,
    combined_loss,
    confusion,
    read_probmap,
    soft_mca,
    threshold_binarize,
    topk_binarize,
)
from .pgm import read_pgm, write_pgm
from .primes import count_primes, save_bitmap, sieve_range
from .report import FORMATS, emit_report
from .spiral import export_raster, range_spec, sieve_and_render
from .stats import (
    BaselineSpec,
    density_series,
    naive_expected_metrics,
    naive_mc_oracle,
    normalize_index,
)


def _cmd_sieve(args) -> int:
    bm = sieve_range(args.lo, args.hi, args.segment_size)
    n = count_primes(bm)
    if args.out:
        save_bitmap(bm, args.out)
        print(f"wrote {args.out} ({len(bm)} bits, {n} primes)")
    else:
        print(n)
    return 0


def _cmd_render(args) -> int:
    rng = range_spec(args.range)
    grid = sieve_and_render(rng, args.segment_size)
    out = Path(args.out or f"{rng.name.replace(':', '_')}.pgm")
    export_raster(grid, out)
    print(f"wrote {out} ({grid.side}x{grid.side}, {grid.white_count} white)")
    return 0


def _cmd_blocks(args) -> int:
    rng = range_spec(args.range)
    grid = sieve_and_render(rng)
    manifest = ds.plan_blocks(
        grid, args.count, args.size, seed=args.seed,
        mask_seed=args.mask_seed, mask_ratio=args.mask_ratio,
    )
    if args.train or args.val:
        manifest = ds.split(manifest, args.train, args.val, args.split_seed)
    out = Path(args.out)
    ds.extract(grid, manifest, out)
    print(f"wrote {len(manifest.entries)} blocks to {out}")
    return 0


def _cmd_split(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    manifest = ds.split(manifest, args.train, args.val, args.seed)
    manifest.save(args.manifest)
    counts = {r: len(manifest.by_role(r)) for r in ds.ROLES}
    print(f"updated {args.manifest}: {counts}")
    return 0


def _cmd_mask(args) -> int:
    m = ds.gen_mask(args.block_id, args.ratio, args.seed, args.size)
    if args.out:
        img = (m.to_bool() * np.uint8(255)).astype(np.uint8)
        write_pgm(img, args.out)
        print(f"wrote {args.out} ({m.revealed} revealed)")
    else:
        print(m.revealed)
    return 0


def _cmd_baseline(args) -> int:
    spec = BaselineSpec(p=args.p, q=args.q)
    doc = {"closed_form": naive_expected_metrics(spec).as_dict()}
    if args.trials:
        doc["monte_carlo"] = naive_mc_oracle(spec, args.trials, args.seed).as_dict()
        doc["trials"] = args.trials
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_density(args) -> int:
    series = density_series(args.lo, args.hi, args.points)
    values = [pt.density for pt in series]
    if args.normalize:
        values = normalize_index(values)
    lines = [f"{pt.x},{v:.10g}" for pt, v in zip(series, values)]
    text = "x,value\n" + "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({len(series)} points)")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_loss(args) -> int:
    pm = read_probmap(args.pred)
    truth = read_pgm(args.truth) >= 128
    params = LossParams(alpha=args.alpha, beta=args.beta)
    doc = {
        "soft_mca": soft_mca(pm, truth),
        "bce": bce(pm, truth),
        "combined": combined_loss(pm, truth, params),
        "alpha": params.alpha,
        "beta": params.beta,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _eval_single(args) -> int:
    ds_dir = Path(args.dataset)
    manifest = ds.load_manifest(ds_dir / "manifest.json")
    if args.topk is not None:
        binarize = lambda pm: topk_binarize(pm, args.topk)
    else:
        t = 0.5 if args.threshold is None else args.threshold
        binarize = lambda pm: threshold_binarize(pm, t)
    bundle, per_block, boot = pl.score_cell(
        ds_dir, manifest, Path(args.pred), binarize,
        args.replicates, args.level, args.seed,
    )
    entries = pl.eval_entries(manifest)
    doc = {
        "metrics": bundle.as_dict(),
        "bootstrap": {
            name: {
                "point": r.point,
                "ci_low": r.ci_low,
                "ci_high": r.ci_high,
                "half_width": r.half_width,
                "replicates": r.replicates,
                "seed": r.seed,
            }
            for name, r in boot.items()
        },
        "level": args.level,
        "blocks": [
            {
                "block_id": e.block_id,
                "predicted_white": c.tp + c.fp,
                "truth_white": c.tp + c.fn,
                "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn,
            }
            for e, c in zip(entries, per_block)
        ],
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    if args.bundle_dir:
        _export_eval_bundle(ds_dir, manifest, Path(args.pred), binarize, Path(args.bundle_dir))
    return 0


def _export_eval_bundle(ds_dir, manifest, pred_dir, binarize, out_dir) -> None:
    """Per block: masked input, binarized prediction, error map, truth and
    a stats sidecar (the full evaluation bundle, minus figure composition)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for e in pl.eval_entries(manifest):
        truth = ds.load_block(ds_dir, e)
        pm = read_probmap(pred_dir / f"block_{e.block_id:04d}.pmf")
        pred = binarize(pm).astype(bool)
        mask = ds.gen_mask(e.block_id, manifest.mask_ratio, manifest.mask_seed, e.block_size)
        masked = ds.apply_mask(truth, mask)
        stem = f"block_{e.block_id:04d}"
        write_pgm((masked * np.uint8(255)).astype(np.uint8), out_dir / f"{stem}_masked.pgm")
        write_pgm((pred * np.uint8(255)).astype(np.uint8), out_dir / f"{stem}_pred.pgm")
        write_pgm(((pred ^ truth) * np.uint8(255)).astype(np.uint8), out_dir / f"{stem}_error.pgm")
        write_pgm((truth * np.uint8(255)).astype(np.uint8), out_dir / f"{stem}_truth.pgm")
        c = confusion(pred, truth)
        stats = classification_report(c).as_dict()
        stats.update({"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn})
        (out_dir / f"{stem}_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")


def _eval_matrix(args) -> int:
    config = pl.load_config(args.config)
    if args.topk is not None:
        config = replace(config, topk_fraction=args.topk, threshold=None)
    elif args.threshold is not None:
        config = replace(config, threshold=args.threshold)
    if args.replicates is not None:
        config = replace(config, bootstrap_replicates=args.replicates)
    matrix = pl.run_pipeline(
        config,
        predictions_root=args.predictions_root,
        datasets_root=args.datasets_root,
        mock=args.mock,
        jobs=args.jobs,
    )
    out = Path(args.out or "matrix.json")
    pl.save_matrix(matrix, out)
    print(f"wrote {out} ({len(matrix.test_ranges)}x{len(matrix.train_ranges)} cells)")
    return 0


def _cmd_eval(args) -> int:
    if args.config:
        if not (args.predictions_root and args.datasets_root):
            raise ValueError("--config mode needs --predictions-root and --datasets-root")
        return _eval_matrix(args)
    if not (args.dataset and args.pred):
        raise ValueError("either --config or both --dataset and --pred are required")
    return _eval_single(args)


def _cmd_report(args) -> int:
    matrix = pl.load_matrix(args.matrix)
    files = emit_report(matrix, args.format, args.out)
    print("\n".join(str(f) for f in files))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spiralbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="exact primality for [lo, hi)")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--segment-size", type=int, default=1 << 20)
    p.add_argument("--out", help="write a UPB1 bitmap here instead of printing the count")
    p.set_defaults(func=_cmd_sieve)

    p = sub.add_parser("render", help="rasterize a range to PGM + JSON sidecar")
    p.add_argument("--range", required=True, help="preset name (25m..500m) or lo:hi")
    p.add_argument("--segment-size", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("blocks", help="plan + extract a block dataset")
    p.add_argument("--range", required=True)
    p.add_argument("--count", type=int, default=350)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--mask-seed", type=int, default=3)
    p.add_argument("--mask-ratio", type=float, default=0.3)
    p.add_argument("--train", type=int, default=0)
    p.add_argument("--val", type=int, default=0)
    p.add_argument("--split-seed", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_blocks)

    p = sub.add_parser("split", help="reassign train/val/test roles in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--seed", type=int, default=2)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("mask", help="regenerate a reveal mask from its seed")
    p.add_argument("--block-id", type=int, required=True)
    p.add_argument("--ratio", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--out", help="optional PGM export")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("eval", help="score predictions (single pair or full matrix)")
    p.add_argument("--dataset", help="dataset dir (single-pair mode)")
    p.add_argument("--pred", help="prediction dir (single-pair mode)")
    p.add_argument("--config", help="experiment config file (matrix mode)")
    p.add_argument("--datasets-root")
    p.add_argument("--predictions-root")
    p.add_argument("--mock", choices=pl.MOCK_PREDICTORS)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--topk", type=float, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=4)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--bundle-dir", help="export masked/pred/error/truth rasters + stats")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("baseline", help="ratio-aligned analytic baseline")
    p.add_argument("--p", type=float, required=True, help="true white prevalence")
    p.add_argument("--q", type=float, required=True, help="assigned white rate")
    p.add_argument("--trials", type=int, default=0, help="optional Monte-Carlo check")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("density", help="1/ln(x) curve as two-column CSV")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--normalize", action="store_true", help="divide by the first value")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("loss", help="loss components of one prediction/truth pair")
    p.add_argument("--pred", required=True, help="PMF1 probability map")
    p.add_argument("--truth", required=True, help="PGM ground truth")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("report", help="emit per-metric tables from a matrix JSON")
    p.add_argument("--matrix", required=True)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, ds.QuotaUnreachable, pl.PredictionsMissing) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
