"""Block dataset construction: packing, extraction, splits and reveal masks.

Blocks are square windows of the rendered raster that must lie entirely
inside their range's annulus (every pixel's integer in [lo, hi)).  For
banded ranges the annulus is a square frame; a single aligned grid wastes
the frame's far strips, so candidates come in three deterministic phases:

  1. per-strip aligned grids: the frame is split into top/bottom/left/right
     rectangles and each gets a block-size grid anchored at its own corner
     (for a hole-free range this is exactly the origin-aligned grid);
  2. half-block-offset grids inside the same rectangles;
  3. seeded random anchors on a stride-8 lattice, rejection-sampled.

Every candidate is validated exactly (annulus via closed-form min/max of
the spiral index over the rectangle, plus pairwise disjointness), so the
phases only control search order, never correctness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import bitpack
from .pgm import read_pgm, write_pgm
from .spiral import BitGrid, RangeSpec, rect_n_range, side_for

ROLES = ("train", "val", "test")


class QuotaUnreachable(Exception):
    """Raised when fewer disjoint in-annulus blocks exist than requested."""

    def __init__(self, requested: int, achievable: int):
        self.requested = requested
        self.achievable = achievable
        super().__init__(
            f"requested {requested} blocks but only {achievable} disjoint "
            f"in-annulus placements were found"
        )


@dataclass(frozen=True)
class BlockEntry:
    block_id: int
    range_name: str
    anchor_col: int
    anchor_row: int
    block_size: int
    role: str = "test"
    white_count: int = 0
    file_path: str | None = None


@dataclass(frozen=True)
class BlockManifest:
    entries: tuple[BlockEntry, ...]
    sampling_seed: int
    split_seed: int
    mask_seed: int
    block_size: int
    mask_ratio: float
    range: RangeSpec

    def by_role(self, role: str) -> tuple[BlockEntry, ...]:
        return tuple(e for e in self.entries if e.role == role)

    def to_json(self) -> str:
        doc = {
            "range": {
                "name": self.range.name,
                "lo": self.range.lo,
                "hi": self.range.hi,
                "side": self.range.side,
            },
            "block_size": self.block_size,
            "mask_ratio": self.mask_ratio,
            "seeds": {
                "sampling_seed": self.sampling_seed,
                "split_seed": self.split_seed,
                "mask_seed": self.mask_seed,
            },
            "entries": [
                {
                    "block_id": e.block_id,
                    "range_name": e.range_name,
                    "anchor_col": e.anchor_col,
                    "anchor_row": e.anchor_row,
                    "block_size": e.block_size,
                    "role": e.role,
                    "white_count": e.white_count,
                    "file_path": e.file_path,
                }
                for e in self.entries
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def load_manifest(path: str | Path) -> BlockManifest:
    doc = json.loads(Path(path).read_text())
    rng = RangeSpec(**doc["range"])
    entries = tuple(BlockEntry(**e) for e in doc["entries"])
    return BlockManifest(
        entries=entries,
        sampling_seed=doc["seeds"]["sampling_seed"],
        split_seed=doc["seeds"]["split_seed"],
        mask_seed=doc["seeds"]["mask_seed"],
        block_size=doc["block_size"],
        mask_ratio=doc["mask_ratio"],
        range=rng,
    )


@dataclass(frozen=True)
class MaskBitmap:
    """Packed reveal mask for one block: 1 = pixel revealed."""

    block_id: int
    bits: np.ndarray
    ratio: float
    seed: int
    block_size: int

    def to_bool(self) -> np.ndarray:
        s = self.block_size
        return bitpack.slice_bool(self.bits, s * s, 0, s * s).reshape(s, s)

    @property
    def revealed(self) -> int:
        return bitpack.popcount(self.bits)


def _hole_bounds(rng: RangeSpec) -> tuple[int, int] | None:
    """Pixel rows/cols of the central square that holds all n < lo."""
    if rng.lo <= 1:
        return None
    inner = side_for(max(rng.lo - 1, 9))
    start = rng.center - (inner - 1) // 2
    return start, start + inner


def _partition_rects(side: int, hole: tuple[int, int] | None):
    """Annulus frame as up to four disjoint rectangles (r0, r1, c0, c1)."""
    if hole is None:
        return [(0, side, 0, side)]
    hs, he = hole
    rects = [
        (0, hs, 0, side),      # top strip, full width
        (he, side, 0, side),   # bottom strip, full width
        (hs, he, 0, hs),       # left strip
        (hs, he, he, side),    # right strip
    ]
    return [r for r in rects if r[0] < r[1] and r[2] < r[3]]


def _block_in_annulus(rng: RangeSpec, row: int, col: int, bs: int) -> bool:
    c = rng.center
    x0, x1 = col - c, col + bs - 1 - c
    y0, y1 = c - row - bs + 1, c - row
    n_min, n_max = rect_n_range(x0, x1, y0, y1)
    return n_min >= rng.lo and n_max < rng.hi


def _overlaps(placed: list[tuple[int, int]], row: int, col: int, bs: int) -> bool:
    for r, c in placed:
        if row < r + bs and r < row + bs and col < c + bs and c < col + bs:
            return True
    return False


def aligned_grid_capacity(rng: RangeSpec, block_size: int) -> int:
    """In-annulus block count of the plain origin-aligned grid.

    Diagnostic only; for banded presets it undershoots what the strip-aware
    planner can place (e.g. 329 < 350 on the 50m band).
    """
    tiles = rng.side // block_size
    n = 0
    for i in range(tiles):
        for j in range(tiles):
            if _block_in_annulus(rng, i * block_size, j * block_size, block_size):
                n += 1
    return n


def _grid_candidates(rects, bs: int, offset_row: int, offset_col: int):
    for r0, r1, c0, c1 in rects:
        rows = range(r0 + offset_row, r1 - bs + 1, bs)
        cols = range(c0 + offset_col, c1 - bs + 1, bs)
        for row in rows:
            for col in cols:
                yield row, col


def plan_blocks(
    grid: BitGrid,
    count: int,
    block_size: int = 256,
    seed: int = 0,
    mask_seed: int = 0,
    mask_ratio: float = 0.3,
    max_random_attempts: int | None = None,
) -> BlockManifest:
    """Place exactly `count` disjoint in-annulus blocks, deterministically.

    Raises QuotaUnreachable (with the achievable maximum) if the three
    phases cannot satisfy the quota.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if block_size > grid.side:
        raise ValueError(f"block_size {block_size} exceeds side {grid.side}")
    rng_spec = grid.range
    bs = block_size
    rects = _partition_rects(grid.side, _hole_bounds(rng_spec))
    placed: list[tuple[int, int]] = []

    half = bs // 2
    phases = [
        _grid_candidates(rects, bs, 0, 0),
        _grid_candidates(rects, bs, half, half),
        _grid_candidates(rects, bs, half, 0),
        _grid_candidates(rects, bs, 0, half),
    ]
    for cand in phases:
        if len(placed) >= count:
            break
        for row, col in cand:
            if len(placed) >= count:
                break
            if _overlaps(placed, row, col, bs):
                continue
            if _block_in_annulus(rng_spec, row, col, bs):
                placed.append((row, col))

    if len(placed) < count:
        gen = np.random.Generator(np.random.PCG64(seed))
        hi_anchor = (grid.side - bs) // 8
        attempts = max_random_attempts or max(20_000, 400 * count)
        for _ in range(attempts):
            if len(placed) >= count:
                break
            row = 8 * int(gen.integers(0, hi_anchor + 1))
            col = 8 * int(gen.integers(0, hi_anchor + 1))
            if _overlaps(placed, row, col, bs):
                continue
            if _block_in_annulus(rng_spec, row, col, bs):
                placed.append((row, col))

    if len(placed) < count:
        raise QuotaUnreachable(count, len(placed))

    entries = []
    for bid, (row, col) in enumerate(placed):
        white = int(grid.rect_bool(row, col, bs, bs).sum())
        entries.append(
            BlockEntry(
                block_id=bid,
                range_name=rng_spec.name,
                anchor_col=col,
                anchor_row=row,
                block_size=bs,
                role="test",
                white_count=white,
            )
        )
    return BlockManifest(
        entries=tuple(entries),
        sampling_seed=seed,
        split_seed=0,
        mask_seed=mask_seed,
        block_size=bs,
        mask_ratio=mask_ratio,
        range=rng_spec,
    )


def split(manifest: BlockManifest, n_train: int, n_val: int, seed: int) -> BlockManifest:
    """Seeded shuffle, then train/val assignment; leftovers become test."""
    n = len(manifest.entries)
    if n_train + n_val > n:
        raise ValueError(f"split {n_train}+{n_val} exceeds {n} blocks")
    gen = np.random.Generator(np.random.PCG64(seed))
    order = gen.permutation(n)
    roles = {}
    for pos, idx in enumerate(order):
        if pos < n_train:
            roles[int(idx)] = "train"
        elif pos < n_train + n_val:
            roles[int(idx)] = "val"
        else:
            roles[int(idx)] = "test"
    entries = tuple(replace(e, role=roles[i]) for i, e in enumerate(manifest.entries))
    return replace(manifest, entries=entries, split_seed=seed)


def block_file_name(entry: BlockEntry) -> str:
    return f"block_{entry.block_id:04d}.pgm"


def extract(grid: BitGrid, manifest: BlockManifest, out_dir: str | Path) -> BlockManifest:
    """Write one binary PGM per block and record paths + white counts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for e in manifest.entries:
        if not (
            0 <= e.anchor_row <= grid.side - e.block_size
            and 0 <= e.anchor_col <= grid.side - e.block_size
        ):
            raise ValueError(f"block {e.block_id} anchor outside the raster")
        sub = grid.rect_bool(e.anchor_row, e.anchor_col, e.block_size, e.block_size)
        img = (sub * np.uint8(255)).astype(np.uint8)
        name = block_file_name(e)
        write_pgm(img, out_dir / name)
        entries.append(replace(e, white_count=int(sub.sum()), file_path=name))
    mf = replace(manifest, entries=tuple(entries))
    mf.save(out_dir / "manifest.json")
    return mf


def load_block(dataset_dir: str | Path, entry: BlockEntry) -> np.ndarray:
    """Block raster as a bool array (True = prime)."""
    if entry.file_path is None:
        raise ValueError(f"block {entry.block_id} has not been extracted")
    img = read_pgm(Path(dataset_dir) / entry.file_path)
    return img >= 128


def gen_mask(block_id: int, ratio: float, seed: int, block_size: int = 256) -> MaskBitmap:
    """Bernoulli(ratio) reveal mask, regenerable from (seed, block_id).

    The law (shared verbatim with any consumer that must replay masks):
    pixel i, row-major, is revealed iff the i-th double of
    numpy's Philox4x64 keyed with (seed, block_id) is < ratio.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    if seed < 0 or block_id < 0:
        raise ValueError("seed and block_id must be non-negative")
    key = np.array([seed, block_id], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u = gen.random(block_size * block_size)
    return MaskBitmap(block_id, bitpack.pack(u < ratio), ratio, seed, block_size)


def apply_mask(block: np.ndarray, mask: MaskBitmap) -> np.ndarray:
    """Keep revealed pixels, zero the hidden ones."""
    m = mask.to_bool()
    if block.shape != m.shape:
        raise ValueError(f"block {block.shape} vs mask {m.shape}")
    return np.where(m, block, False if block.dtype == bool else 0)
