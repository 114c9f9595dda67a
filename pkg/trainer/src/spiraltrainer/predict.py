"""Inference: replay the seeded evaluation masks and export one PMF1
probability map per block."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import torch

from .data import eval_mask_tensor
from .formats import load_manifest, write_probmap
from .train import load_checkpoint, seed_everything


def predict(
    checkpoint_path: str | Path,
    manifest_path: str | Path,
    out_dir: str | Path,
    role: str = "test",
    mask_seed: int | None = None,
) -> list[Path]:
    """Writes block_<id>.pmf for every block of the given role.

    Masks are regenerated from the manifest's seed (or an override), so the
    output is byte-identical across invocations.
    """
    model, config = load_checkpoint(checkpoint_path)
    seed_everything(config.seed, config.deterministic)
    manifest = load_manifest(manifest_path)
    if mask_seed is not None:
        manifest = replace(manifest, mask_seed=mask_seed)
    records = manifest.by_role(role) or manifest.by_role("val")
    if not records:
        raise ValueError(f"manifest has neither {role!r} nor 'val' blocks")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with torch.no_grad():
        for rec in records:
            block = torch.from_numpy(manifest.load_block(rec)).unsqueeze(0).unsqueeze(0)
            mask = eval_mask_tensor(rec.block_id, manifest).unsqueeze(0)
            pred = model(block * mask).squeeze().numpy().astype(np.float32)
            pred = np.clip(pred, 0.0, 1.0)
            path = out_dir / f"block_{rec.block_id:04d}.pmf"
            write_probmap(pred, path)
            written.append(path)
    return written
