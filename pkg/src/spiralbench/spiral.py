"""Square-spiral coordinate algebra and binary raster rendering.

Layout convention (fixed for the whole artifact): integer 1 sits at the
origin, 2 one step east, and the walk turns counterclockwise (up, left,
down, right) with y pointing up.  Ring k >= 1 holds the 8k integers in
((2k-1)^2, (2k+1)^2] on the square of Chebyshev radius k; the odd square
(2k+1)^2 lands on the corner (k, -k).

Pixel coordinates place (col, row) = (c + x, c - y) with c = (side-1)/2,
so rasters read like images (row 0 on top).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bitpack
from .pgm import write_pgm
from .primes import PrimalityBitmap, count_primes


def side_for(hi: int) -> int:
    """Smallest odd s with s*s >= hi."""
    if hi < 9:
        raise ValueError(f"need hi >= 9, got {hi}")
    s = math.isqrt(hi - 1) + 1
    return s if s % 2 == 1 else s + 1


@dataclass(frozen=True)
class RangeSpec:
    """A half-open integer band [lo, hi) plus the odd side of its raster."""

    name: str
    lo: int
    hi: int
    side: int

    def __post_init__(self):
        if not 1 <= self.lo < self.hi:
            raise ValueError(f"bad band [{self.lo}, {self.hi})")
        if self.side % 2 == 0 or self.side * self.side < self.hi - 1:
            raise ValueError(f"side {self.side} cannot cover [{self.lo}, {self.hi})")

    @property
    def center(self) -> int:
        return (self.side - 1) // 2


# The seven preset bands; each band's hi is the next odd square, so
# consecutive presets tile the integers without gaps.
PRESETS: dict[str, RangeSpec] = {
    r.name: r
    for r in (
        RangeSpec("25m", 1, 25_010_001, 5001),
        RangeSpec("50m", 25_010_001, 50_027_329, 7073),
        RangeSpec("100m", 50_027_329, 100_020_001, 10001),
        RangeSpec("200m", 100_020_001, 200_024_449, 14143),
        RangeSpec("300m", 200_024_449, 300_017_041, 17321),
        RangeSpec("400m", 300_017_041, 400_040_001, 20001),
        RangeSpec("500m", 400_040_001, 500_014_321, 22361),
    )
}


def range_spec(name_or_band: str) -> RangeSpec:
    """Resolve a preset name like '25m' or a custom band 'lo:hi'."""
    if name_or_band in PRESETS:
        return PRESETS[name_or_band]
    if ":" in name_or_band:
        lo_s, hi_s = name_or_band.split(":", 1)
        lo, hi = int(lo_s), int(hi_s)
        return RangeSpec(f"{lo}:{hi}", lo, hi, side_for(hi))
    raise ValueError(f"unknown range {name_or_band!r} (presets: {', '.join(PRESETS)})")


def n_to_xy(n: int) -> tuple[int, int]:
    """Spiral position of integer n >= 1."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n == 1:
        return (0, 0)
    k = (math.isqrt(n - 1) + 1) // 2
    j = n - (2 * k - 1) ** 2 - 1  # 0-based offset along ring k, < 8k
    edge, t = divmod(j, 2 * k)
    if edge == 0:  # east side, walking up
        return (k, -k + 1 + t)
    if edge == 1:  # north side, walking left
        return (k - 1 - t, k)
    if edge == 2:  # west side, walking down
        return (-k, k - 1 - t)
    return (-k + 1 + t, -k)  # south side, walking right


def xy_to_n(x: int, y: int) -> int:
    """Closed-form inverse of n_to_xy."""
    k = max(abs(x), abs(y))
    if k == 0:
        return 1
    b = (2 * k - 1) ** 2
    if x == k and y > -k:
        return b + k + y
    if y == k:
        return b + 3 * k - x
    if x == -k:
        return b + 5 * k - y
    return b + 7 * k + x


def n_to_xy_vec(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized n_to_xy for int64 arrays."""
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 1):
        raise ValueError("need n >= 1")
    m = n - 1
    r = np.sqrt(m.astype(np.float64)).astype(np.int64)
    r -= (r * r > m)  # float sqrt can overshoot by one
    r += ((r + 1) * (r + 1) <= m)
    k = (r + 1) // 2
    k1 = np.maximum(k, 1)  # avoid 0-division for n == 1; fixed up below
    j = n - (2 * k1 - 1) ** 2 - 1
    edge, t = np.divmod(j, 2 * k1)
    x = np.select(
        [edge == 0, edge == 1, edge == 2], [k1, k1 - 1 - t, -k1], -k1 + 1 + t
    )
    y = np.select(
        [edge == 0, edge == 1, edge == 2], [-k1 + 1 + t, k1, k1 - 1 - t], -k1
    )
    center = n == 1
    return np.where(center, 0, x), np.where(center, 0, y)


def xy_to_n_vec(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized xy_to_n for int64 arrays."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    k = np.maximum(np.abs(x), np.abs(y))
    b = (2 * k - 1) ** 2
    n = np.select(
        [(x == k) & (y > -k), y == k, x == -k],
        [b + k + y, b + 3 * k - x, b + 5 * k - y],
        b + 7 * k + x,
    )
    return np.where(k == 0, 1, n)


def _ring_extremes(k: int, x0: int, x1: int, y0: int, y1: int) -> list[int]:
    """n at the clipped endpoints of ring k's four sides within the rect.

    n is strictly monotone along each directed side, so side extremes over
    any clipped subsegment sit at its endpoints.
    """
    b = (2 * k - 1) ** 2
    out: list[int] = []
    if x0 <= k <= x1:  # east side: y in [-k+1, k]
        ylo, yhi = max(y0, -k + 1), min(y1, k)
        if ylo <= yhi:
            out += [b + k + ylo, b + k + yhi]
    if y0 <= k <= y1:  # north side: x in [-k, k-1]
        xlo, xhi = max(x0, -k), min(x1, k - 1)
        if xlo <= xhi:
            out += [b + 3 * k - xlo, b + 3 * k - xhi]
    if x0 <= -k <= x1:  # west side: y in [-k, k-1]
        ylo, yhi = max(y0, -k), min(y1, k - 1)
        if ylo <= yhi:
            out += [b + 5 * k - ylo, b + 5 * k - yhi]
    if y0 <= -k <= y1:  # south side: x in [-k+1, k]
        xlo, xhi = max(x0, -k + 1), min(x1, k)
        if xlo <= xhi:
            out += [b + 7 * k + xlo, b + 7 * k + xhi]
    return out


def rect_n_range(x0: int, x1: int, y0: int, y1: int) -> tuple[int, int]:
    """Exact (min, max) of xy_to_n over the lattice rectangle [x0,x1]x[y0,y1].

    O(1): the extremes live on the innermost / outermost rings meeting the
    rectangle, and on each ring only at clipped side endpoints.
    """
    if x0 > x1 or y0 > y1:
        raise ValueError("empty rectangle")
    dx = 0 if x0 <= 0 <= x1 else min(abs(x0), abs(x1))
    dy = 0 if y0 <= 0 <= y1 else min(abs(y0), abs(y1))
    k_min = max(dx, dy)
    k_max = max(abs(x0), abs(x1), abs(y0), abs(y1))
    n_min = 1 if k_min == 0 else min(_ring_extremes(k_min, x0, x1, y0, y1))
    n_max = 1 if k_max == 0 else max(_ring_extremes(k_max, x0, x1, y0, y1))
    return n_min, n_max


@dataclass(frozen=True)
class BitGrid:
    """Packed row-major binary raster of a spiral square (1 = prime)."""

    side: int
    bits: np.ndarray  # uint8, side*side bits LSB-first, row-major
    range: RangeSpec
    white_count: int

    @property
    def center(self) -> int:
        return (self.side - 1) // 2

    def pixel(self, col: int, row: int) -> int:
        if not (0 <= col < self.side and 0 <= row < self.side):
            raise ValueError(f"pixel ({col}, {row}) outside {self.side}x{self.side}")
        return bitpack.get_bit(self.bits, row * self.side + col)

    def row_bool(self, row: int, col0: int = 0, col1: int | None = None) -> np.ndarray:
        col1 = self.side if col1 is None else col1
        base = row * self.side
        return bitpack.slice_bool(self.bits, self.side * self.side, base + col0, base + col1)

    def rect_bool(self, row0: int, col0: int, height: int, width: int) -> np.ndarray:
        """Unpacked (height, width) bool sub-raster."""
        return np.stack([self.row_bool(row0 + r, col0, col0 + width) for r in range(height)])


def render(rng: RangeSpec, primes: PrimalityBitmap) -> BitGrid:
    """Rasterize the full square [1, side^2] of a range's spiral.

    The square is rendered even where it exceeds the band [lo, hi): the
    extra pixels are exactly the odd square side^2 (composite for every
    preset), and band membership is enforced later, at block sampling.
    """
    side = rng.side
    n_top = side * side
    if primes.lo > 1 or primes.hi < n_top + 1:
        raise ValueError(
            f"primality bitmap [{primes.lo}, {primes.hi}) must cover [1, {n_top + 1})"
        )
    c = rng.center
    g = np.zeros((side, side), dtype=bool)
    g[c, c] = bool(primes.bit(1))
    for k in range(1, c + 1):
        b = (2 * k - 1) ** 2
        east = primes.slice_bool(b + 1, b + 2 * k + 1)
        g[c - k : c + k, c + k] = east[::-1]
        north = primes.slice_bool(b + 2 * k + 1, b + 4 * k + 1)
        g[c - k, c - k : c + k] = north[::-1]
        west = primes.slice_bool(b + 4 * k + 1, b + 6 * k + 1)
        g[c - k + 1 : c + k + 1, c - k] = west
        south = primes.slice_bool(b + 6 * k + 1, b + 8 * k + 1)
        g[c + k, c - k + 1 : c + k + 1] = south
    bits = bitpack.pack(g)
    return BitGrid(side, bits, rng, bitpack.popcount(bits))


def export_raster(grid: BitGrid, path: str | Path) -> Path:
    """Write the raster as binary PGM (white = prime) plus a JSON sidecar."""
    path = Path(path)
    rows = np.unpackbits(grid.bits, bitorder="little")[: grid.side * grid.side]
    img = (rows.reshape(grid.side, grid.side) * np.uint8(255)).astype(np.uint8)
    write_pgm(img, path)
    sidecar = {
        "name": grid.range.name,
        "lo": grid.range.lo,
        "hi": grid.range.hi,
        "side": grid.side,
        "white_count": grid.white_count,
    }
    side_path = path.with_suffix(".json")
    side_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    return path


def sieve_and_render(rng: RangeSpec, segment_size: int | None = None) -> BitGrid:
    """Convenience: sieve [1, side^2] and rasterize in one go."""
    from .primes import sieve_range, DEFAULT_SEGMENT_SIZE

    seg = DEFAULT_SEGMENT_SIZE if segment_size is None else segment_size
    primes = sieve_range(1, rng.side * rng.side + 1, seg)
    return render(rng, primes)
