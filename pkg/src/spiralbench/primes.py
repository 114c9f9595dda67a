"""Segmented sieve of Eratosthenes with packed-bit output.

Exact primality for arbitrary ranges [lo, hi), designed to stay fast and
memory-flat up to hi ~ 5e8 (the largest preset band).  Output is one bit
per integer, LSB-first, so a range of half a billion integers packs into
~60 MiB.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import bitpack

DEFAULT_SEGMENT_SIZE = 1 << 20
DEFAULT_CEILING = 1 << 63

BITMAP_MAGIC = b"UPB1"


@dataclass(frozen=True)
class PrimalityBitmap:
    """Primality of every integer in [lo, hi): bit(n) = 1 iff n is prime."""

    lo: int
    hi: int
    bits: np.ndarray  # uint8, ceil((hi - lo) / 8) bytes, LSB-first

    def __post_init__(self):
        expect = (self.hi - self.lo + 7) // 8
        if self.bits.dtype != np.uint8 or self.bits.size != expect:
            raise ValueError("bit buffer does not match [lo, hi)")

    def __len__(self) -> int:
        return self.hi - self.lo

    def bit(self, n: int) -> int:
        if not self.lo <= n < self.hi:
            raise ValueError(f"{n} outside [{self.lo}, {self.hi})")
        return bitpack.get_bit(self.bits, n - self.lo)

    def slice_bool(self, a: int, b: int) -> np.ndarray:
        """Primality of integers [a, b) as an unpacked bool array."""
        if not (self.lo <= a <= b <= self.hi):
            raise ValueError(f"[{a}, {b}) outside [{self.lo}, {self.hi})")
        return bitpack.slice_bool(self.bits, len(self), a - self.lo, b - self.lo)


@dataclass(frozen=True)
class DensityPoint:
    """A sample of the asymptotic local prime density 1/ln(x)."""

    x: int
    density: float


@lru_cache(maxsize=8)
def _base_primes(limit: int) -> np.ndarray:
    """All primes <= limit via a plain sieve; cached for the process."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p)


def _sieve_segment(start: int, stop: int, base: np.ndarray) -> np.ndarray:
    """Bool primality for integers [start, stop); base covers sqrt(stop-1)."""
    mask = np.zeros(stop - start, dtype=bool)
    first_odd = start | 1
    if first_odd < stop:
        mask[first_odd - start :: 2] = True
    if start <= 2 < stop:
        mask[2 - start] = True
    if start <= 1 < stop:
        mask[1 - start] = False
    for p in base[1:]:  # odd base primes; evens are already dark
        p = int(p)
        sq = p * p
        if sq >= stop:
            break
        m = max(sq, ((start + p - 1) // p) * p)
        if m % 2 == 0:
            m += p
        if m < stop:
            mask[m - start :: 2 * p] = False
    return mask


def sieve_range(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    ceiling: int = DEFAULT_CEILING,
) -> PrimalityBitmap:
    """Exact primality bitmap for [lo, hi).

    The result is bit-identical for any segment_size; segmentation only
    bounds the working-set size.
    """
    if lo < 1:
        raise ValueError(f"lo must be >= 1, got {lo}")
    if hi <= lo:
        raise ValueError(f"need hi > lo, got [{lo}, {hi})")
    if segment_size < 2:
        raise ValueError(f"segment_size must be >= 2, got {segment_size}")
    if hi > ceiling:
        raise ValueError(f"hi {hi} exceeds ceiling {ceiling}")

    base = _base_primes(math.isqrt(hi - 1))
    out = np.zeros((hi - lo + 7) // 8, dtype=np.uint8)
    # Round the span up to whole bytes so each segment packs on a byte edge.
    seg = max(8, ((segment_size + 7) // 8) * 8)
    for start in range(lo, hi, seg):
        stop = min(start + seg, hi)
        packed = np.packbits(_sieve_segment(start, stop, base), bitorder="little")
        b0 = (start - lo) >> 3
        out[b0 : b0 + packed.size] = packed
    return PrimalityBitmap(lo, hi, out)


def count_primes(bitmap: PrimalityBitmap) -> int:
    """Population count of the bitmap (number of primes in [lo, hi))."""
    return bitpack.popcount(bitmap.bits)


def pnt_density(x: float) -> float:
    """Asymptotic local prime density 1/ln(x), defined for x > 1."""
    if x <= 1:
        raise ValueError(f"density is defined for x > 1, got {x}")
    return 1.0 / math.log(x)


def save_bitmap(bitmap: PrimalityBitmap, path: str | Path) -> None:
    """Dump as magic 'UPB1', lo and hi as u64-LE, then the packed bits."""
    with open(path, "wb") as fh:
        fh.write(BITMAP_MAGIC)
        fh.write(struct.pack("<QQ", bitmap.lo, bitmap.hi))
        fh.write(bitmap.bits.tobytes())


def load_bitmap(path: str | Path) -> PrimalityBitmap:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BITMAP_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        lo, hi = struct.unpack("<QQ", fh.read(16))
        bits = np.frombuffer(fh.read(), dtype=np.uint8).copy()
    return PrimalityBitmap(lo, hi, bits)
