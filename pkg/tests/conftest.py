import numpy as np
import pytest

from sesam.raster import BinaryMask


def random_mask(seed: int, max_side: int = 64, density: float | None = None) -> BinaryMask:
    """Seeded random mask; density defaults to a seeded draw in [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    if density is None:
        density = float(rng.uniform(0.1, 0.9))
    return BinaryMask(rng.random((h, w)) < density)


def random_blob(seed: int, side: int = 48) -> BinaryMask:
    """Seeded connected-ish blob (dilated sparse points), never empty."""
    from scipy import ndimage

    rng = np.random.default_rng(seed)
    bits = rng.random((side, side)) < 0.04
    bits = ndimage.binary_dilation(bits, iterations=int(rng.integers(2, 5)))
    if not bits.any():
        bits[side // 2, side // 2] = True
    return BinaryMask(bits)


def flood_fill_components(bits: np.ndarray, connectivity: int) -> list[frozenset]:
    """Independent flood-fill partition oracle (pure Python BFS)."""
    if connectivity == 4:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    parts = []
    for y in range(h):
        for x in range(w):
            if not bits[y, x] or seen[y, x]:
                continue
            stack = [(y, x)]
            seen[y, x] = True
            pixels = []
            while stack:
                cy, cx = stack.pop()
                pixels.append((cy, cx))
                for dy, dx in steps:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        stack.append((ny, nx))
            parts.append(frozenset(pixels))
    return parts


@pytest.fixture(scope="session")
def standard_suite():
    from sesam.scenes import build_suite

    return build_suite(count=20, seed=7)
