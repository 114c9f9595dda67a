"""Dataset plumbing: blocks come from the manifest as {0,1} float tensors;
training masks are resampled per batch, evaluation masks replay the
manifest's seeded law."""

from __future__ import annotations

import numpy as np
import torch
from torch.utils.data import Dataset

from .formats import BlockRecord, Manifest, reveal_mask


class BlockDataset(Dataset):
    def __init__(self, manifest: Manifest, role: str):
        self.manifest = manifest
        self.records = manifest.by_role(role)
        if not self.records:
            raise ValueError(f"manifest has no {role!r} blocks")

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, idx: int):
        rec = self.records[idx]
        block = torch.from_numpy(self.manifest.load_block(rec))
        return block.unsqueeze(0), rec.block_id  # (1, H, W), id


def fresh_batch_masks(shape, ratio: float, generator: torch.Generator) -> torch.Tensor:
    """Bernoulli(ratio) reveal masks, redrawn for every training batch."""
    return (torch.rand(shape, generator=generator) < ratio).float()


def eval_mask_tensor(block_id: int, manifest: Manifest) -> torch.Tensor:
    mask = reveal_mask(block_id, manifest.mask_ratio, manifest.mask_seed, manifest.block_size)
    return torch.from_numpy(mask.astype(np.float32)).unsqueeze(0)
