#!/usr/bin/env python3
"""Export the plot-ready density series: the 1/ln(x) curve over the full
preset span, and the normalized decay of density at the preset upper
bounds (both as two-column CSV).

Usage:
  python scripts/density_curves.py --out-dir curves/
"""

import argparse
from pathlib import Path

from spiralbench import PRESETS, normalize_index, pnt_density
from spiralbench.stats import density_series


def write_csv(path: Path, rows) -> None:
    path.write_text("x,value\n" + "\n".join(f"{x},{v:.10g}" for x, v in rows) + "\n")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="curves")
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    hi = max(r.hi for r in PRESETS.values())
    pts = density_series(10, hi, points=args.points)
    write_csv(out / "density.csv", [(p.x, p.density) for p in pts])

    uppers = sorted(r.hi for r in PRESETS.values())
    decay = normalize_index([pnt_density(x) for x in uppers])
    write_csv(out / "density_decay_normalized.csv", list(zip(uppers, decay)))

    print(f"wrote {out / 'density.csv'} and {out / 'density_decay_normalized.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
