#!/usr/bin/env python3
"""Print the ratio-aligned baseline grid for a set of prevalence /
assignment rates, optionally cross-checked with the Monte-Carlo twin.

Usage:
  python scripts/baseline_table.py
  python scripts/baseline_table.py --rates 0.0527 0.0626 --trials 10000000
"""

import argparse
import json

from spiralbench import BaselineSpec, naive_expected_metrics, naive_mc_oracle
from spiralbench.metrics import METRIC_FIELDS


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rates", type=float, nargs="+", default=[0.0527, 0.0626])
    ap.add_argument("--trials", type=int, default=0, help="MC verification trials per cell")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    columns = []
    for p in args.rates:
        for q in args.rates:
            spec = BaselineSpec(p, q)
            col = {"p": p, "q": q, "closed_form": naive_expected_metrics(spec).as_dict()}
            if args.trials:
                mc = naive_mc_oracle(spec, args.trials, args.seed).as_dict()
                col["monte_carlo"] = mc
                col["max_abs_diff"] = max(
                    abs(col["closed_form"][m] - mc[m]) for m in METRIC_FIELDS
                )
            columns.append(col)
    print(json.dumps(columns, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
