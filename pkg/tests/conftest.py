import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image_and_mask(rng, h=None, w=None):
    """An RGB uint8 image with a random non-empty rectangular-ish mask."""
    h = h or int(rng.integers(6, 24))
    w = w or int(rng.integers(6, 24))
    image = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    mask = np.zeros((h, w), dtype=bool)
    top = int(rng.integers(0, h - 2))
    left = int(rng.integers(0, w - 2))
    bottom = int(rng.integers(top + 2, h + 1))
    right = int(rng.integers(left + 2, w + 1))
    mask[top:bottom, left:right] = True
    # poke random holes so borders are not just the rectangle frame
    holes = rng.random((h, w)) < 0.1
    mask &= ~holes
    if not mask.any():
        mask[top, left] = True
    return image, mask
