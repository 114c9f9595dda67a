"""CLI: `spiraltrainer train` and `spiraltrainer predict`."""

from __future__ import annotations

import argparse
import sys

from .predict import predict
from .train import TrainerConfig, train


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="spiraltrainer")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the inpainting model on a block dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None, help="override max epochs")
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--mask-ratio", type=float, default=0.3)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--pretrained", action="store_true")
    p.add_argument("--deterministic", action="store_true")

    q = sub.add_parser("predict", help="export PMF1 probability maps")
    q.add_argument("--checkpoint", required=True)
    q.add_argument("--manifest", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--role", default="test")
    q.add_argument("--mask-seed", type=int, default=None)

    args = ap.parse_args(argv)
    try:
        if args.command == "train":
            config = TrainerConfig(
                lr=args.lr,
                batch_size=args.batch_size,
                mask_ratio=args.mask_ratio,
                alpha=args.alpha,
                beta=args.beta,
                seed=args.seed,
                pretrained=args.pretrained,
                deterministic=args.deterministic,
            )
            result = train(config, args.manifest, args.out, max_epochs=args.epochs)
            print(
                f"best epoch {result.best_epoch} "
                f"(val hard MCA {result.best_val_hard_mca:.4f}) -> {result.checkpoint_path}"
            )
        else:
            written = predict(args.checkpoint, args.manifest, args.out, role=args.role,
                              mask_seed=args.mask_seed)
            print(f"wrote {len(written)} probability maps to {args.out}")
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
