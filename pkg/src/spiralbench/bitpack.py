"""Packed-bit helpers shared by the prime bitmaps and rasters.

Convention everywhere: least-significant-bit-first within each byte, so
bit i of a sequence lives in byte i >> 3 at position i & 7.
"""

from __future__ import annotations

import numpy as np

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint32)


def pack(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean array (any shape, row-major) into LSB-first bytes."""
    return np.packbits(np.ascontiguousarray(mask).reshape(-1), bitorder="little")


def popcount(packed: np.ndarray) -> int:
    return int(_POPCOUNT8[packed].sum())


def get_bit(packed: np.ndarray, i: int) -> int:
    return (int(packed[i >> 3]) >> (i & 7)) & 1


def slice_bool(packed: np.ndarray, nbits: int, a: int, b: int) -> np.ndarray:
    """Unpack bits [a, b) of an nbits-long packed sequence as a bool array."""
    if not 0 <= a <= b <= nbits:
        raise ValueError(f"bit slice [{a}, {b}) outside [0, {nbits})")
    byte0 = a >> 3
    byte1 = (b + 7) >> 3
    u = np.unpackbits(packed[byte0:byte1], bitorder="little")
    off = a - byte0 * 8
    return u[off : off + (b - a)].view(np.bool_)
