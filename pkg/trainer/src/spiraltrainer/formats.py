"""Readers/writers for the scorer's file contracts.

Everything here re-implements the documented formats (binary PGM blocks,
manifest JSON, PMF1 probability maps, the Philox reveal-mask law) so the
trainer never imports the scoring package: the files ARE the interface.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PROBMAP_MAGIC = b"PMF1"


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5" or int(fields[3]) != 255:
        raise ValueError(f"{path}: expected binary PGM with maxval 255")
    w, h = int(fields[1]), int(fields[2])
    pos += 1
    return np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos).reshape(h, w).copy()


def write_probmap(values: np.ndarray, path: str | Path) -> None:
    """'PMF1', u32-LE width and height, then f32-LE pixels row-major."""
    if values.ndim != 2:
        raise ValueError("expected a 2-D probability array")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(PROBMAP_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_probmap(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != PROBMAP_MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    w, h = struct.unpack("<II", data[4:12])
    return np.frombuffer(data, dtype="<f4", count=w * h, offset=12).reshape(h, w).copy()


@dataclass(frozen=True)
class BlockRecord:
    block_id: int
    role: str
    file_path: str
    white_count: int


@dataclass(frozen=True)
class Manifest:
    root: Path
    block_size: int
    mask_ratio: float
    mask_seed: int
    entries: tuple[BlockRecord, ...]

    def by_role(self, role: str) -> tuple[BlockRecord, ...]:
        return tuple(e for e in self.entries if e.role == role)

    def load_block(self, rec: BlockRecord) -> np.ndarray:
        return (read_pgm(self.root / rec.file_path) >= 128).astype(np.float32)


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    entries = tuple(
        BlockRecord(
            block_id=e["block_id"],
            role=e["role"],
            file_path=e["file_path"],
            white_count=e["white_count"],
        )
        for e in doc["entries"]
    )
    return Manifest(
        root=path.parent,
        block_size=doc["block_size"],
        mask_ratio=doc["mask_ratio"],
        mask_seed=doc["seeds"]["mask_seed"],
        entries=entries,
    )


def reveal_mask(block_id: int, ratio: float, seed: int, block_size: int) -> np.ndarray:
    """The shared mask law: pixel i (row-major) is revealed iff the i-th
    double of numpy's Philox stream keyed (seed, block_id) is < ratio."""
    key = np.array([seed, block_id], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u = gen.random(block_size * block_size)
    return (u < ratio).reshape(block_size, block_size)
