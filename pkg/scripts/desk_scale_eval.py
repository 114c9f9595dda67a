#!/usr/bin/env python3
"""Desk-scale end-to-end run: two small contiguous bands, the built-in
mock predictors, bootstrap CIs, and rendered report tables.

Usage:
  python scripts/desk_scale_eval.py --out-dir desk_run/ --mock ratio
"""

import argparse
from pathlib import Path

from spiralbench import ExperimentConfig, Seeds, emit_report, run_pipeline
from spiralbench.pipeline import save_matrix

DESK_RANGES = ("1:160801", "160801:579121")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="desk_run")
    ap.add_argument("--mock", default="ratio", choices=("oracle", "ratio", "noisy-oracle"))
    ap.add_argument("--blocks", type=int, default=32)
    ap.add_argument("--block-size", type=int, default=64)
    ap.add_argument("--replicates", type=int, default=2_000)
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--format", default="markdown", choices=("csv", "markdown", "html", "json"))
    args = ap.parse_args()

    out = Path(args.out_dir)
    cfg = ExperimentConfig(
        ranges=DESK_RANGES,
        block_count=args.blocks,
        block_size=args.block_size,
        n_train=8,
        n_val=8,
        bootstrap_replicates=args.replicates,
        runs_to_average=args.runs,
        seeds=Seeds(),
    )
    matrix = run_pipeline(
        cfg,
        predictions_root=out / "predictions" / args.mock,
        datasets_root=out / "datasets",
        mock=args.mock,
        jobs=args.jobs,
    )
    save_matrix(matrix, out / f"matrix_{args.mock}.json")
    files = emit_report(matrix, args.format, out / f"report_{args.mock}")
    print(f"matrix: {out / f'matrix_{args.mock}.json'}")
    for f in files:
        print(f"table:  {f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
