"""Training loop: Adam, reduce-on-plateau on validation loss, best model
kept by validation hard mean-class accuracy."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import BlockDataset, eval_mask_tensor, fresh_batch_masks
from .formats import Manifest, load_manifest
from .losses import bce, combined_loss, hard_mca, pixel_accuracy, soft_mca, ssim
from .model import InpaintingUNet


@dataclass(frozen=True)
class TrainerConfig:
    encoder: str = "resnet34"
    pretrained: bool = True
    input_channels: int = 1
    output_channels: int = 1
    lr: float = 1e-4
    batch_size: int = 4
    max_epochs: int = 150
    scheduler_factor: float = 0.5
    scheduler_patience: int = 3
    mask_ratio: float = 0.3
    alpha: float = 1.0
    beta: float = 0.5
    seed: int = 42
    deterministic: bool = False


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float
    val_soft_mca: float
    val_bce: float
    val_hard_mca: float
    val_pixel_accuracy: float
    val_ssim: float


def seed_everything(seed: int, deterministic: bool = False) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    if deterministic:
        torch.use_deterministic_algorithms(True)


@dataclass
class TrainResult:
    checkpoint_path: Path
    log: list[EpochLog] = field(default_factory=list)
    best_epoch: int = -1
    best_val_hard_mca: float = -1.0


def _validate(model, manifest: Manifest, records, config) -> dict[str, float]:
    model.eval()
    sums = {k: 0.0 for k in ("loss", "soft_mca", "bce", "hard_mca", "pixel_accuracy", "ssim")}
    with torch.no_grad():
        for rec in records:
            block = torch.from_numpy(manifest.load_block(rec)).unsqueeze(0).unsqueeze(0)
            mask = eval_mask_tensor(rec.block_id, manifest).unsqueeze(0)
            pred = model(block * mask)
            sums["loss"] += float(combined_loss(pred, block, config.alpha, config.beta))
            sums["soft_mca"] += float(soft_mca(pred, block))
            sums["bce"] += float(bce(pred, block))
            sums["hard_mca"] += float(hard_mca(pred, block))
            sums["pixel_accuracy"] += float(pixel_accuracy(pred, block))
            sums["ssim"] += float(ssim(pred, block))
    return {k: v / len(records) for k, v in sums.items()}


def train(
    config: TrainerConfig,
    manifest_path: str | Path,
    out_dir: str | Path,
    max_epochs: int | None = None,
) -> TrainResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed_everything(config.seed, config.deterministic)

    manifest = load_manifest(manifest_path)
    train_ds = BlockDataset(manifest, "train")
    val_records = manifest.by_role("val")
    if not val_records:
        raise ValueError("manifest has no val blocks")

    loader_gen = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(
        train_ds, batch_size=config.batch_size, shuffle=True, generator=loader_gen
    )
    mask_gen = torch.Generator().manual_seed(config.seed + 1)

    model = InpaintingUNet(pretrained=config.pretrained)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode="min", factor=config.scheduler_factor,
        patience=config.scheduler_patience,
    )

    epochs = config.max_epochs if max_epochs is None else max_epochs
    result = TrainResult(checkpoint_path=out_dir / "best.pt")
    log_rows: list[EpochLog] = []

    for epoch in range(1, epochs + 1):
        model.train()
        running, batches = 0.0, 0
        for blocks, _ids in loader:
            masks = fresh_batch_masks(blocks.shape, config.mask_ratio, mask_gen)
            pred = model(blocks * masks)
            loss = combined_loss(pred, blocks, config.alpha, config.beta)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            running += float(loss.detach())
            batches += 1

        val = _validate(model, manifest, val_records, config)
        scheduler.step(val["loss"])
        row = EpochLog(
            epoch=epoch,
            train_loss=running / max(batches, 1),
            val_loss=val["loss"],
            val_soft_mca=val["soft_mca"],
            val_bce=val["bce"],
            val_hard_mca=val["hard_mca"],
            val_pixel_accuracy=val["pixel_accuracy"],
            val_ssim=val["ssim"],
        )
        log_rows.append(row)
        if val["hard_mca"] > result.best_val_hard_mca:
            result.best_val_hard_mca = val["hard_mca"]
            result.best_epoch = epoch
            torch.save(
                {"model": model.state_dict(), "config": asdict(config)},
                result.checkpoint_path,
            )

    result.log = log_rows
    with open(out_dir / "epochs.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(EpochLog.__dataclass_fields__))
        writer.writeheader()
        for row in log_rows:
            writer.writerow(asdict(row))
    summary = {
        "best_epoch": result.best_epoch,
        "best_val_hard_mca": result.best_val_hard_mca,
        "epochs_run": len(log_rows),
        "config": asdict(config),
    }
    (out_dir / "run_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return result


def load_checkpoint(path: str | Path) -> tuple[InpaintingUNet, TrainerConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    config = TrainerConfig(**payload["config"])
    model = InpaintingUNet(pretrained=False)
    model.load_state_dict(payload["model"])
    model.eval()
    return model, config
