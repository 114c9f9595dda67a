import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spiralbench import PRESETS, range_spec, sieve_and_render
from spiralbench.spiral import BitGrid

# desk-scale stand-ins for the full bands: two contiguous odd-square bands
DESK_A = "1:160801"        # side 401
DESK_B = "160801:579121"   # side 761, annulus wide enough for 64-px blocks


@pytest.fixture(scope="session")
def grid_a():
    return sieve_and_render(range_spec(DESK_A))


@pytest.fixture(scope="session")
def grid_b():
    return sieve_and_render(range_spec(DESK_B))


def geometry_grid(preset_name: str) -> BitGrid:
    """A preset-shaped grid with all-zero bits: right geometry, no primes.
    Enough for packing tests, which only read the band and the side."""
    rng = PRESETS[preset_name]
    nbits = rng.side * rng.side
    return BitGrid(rng.side, np.zeros((nbits + 7) // 8, np.uint8), rng, 0)
