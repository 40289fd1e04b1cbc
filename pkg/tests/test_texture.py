import numpy as np
import pytest

from cascadekit.errors import (
    DegenerateTextureError,
    EmptyRegionError,
    ShapeMismatchError,
)
from cascadekit.features.texture import cooccurrence_features, glcm_matrix
from conftest import random_image_and_mask


def checkerboard(n=4):
    board = np.zeros((n, n), dtype=np.uint8)
    board[::2, 1::2] = 255
    board[1::2, ::2] = 255
    return board


def test_uniform_image_exact_values():
    image = np.full((5, 5), 77, dtype=np.uint8)
    mask = np.ones((5, 5), dtype=bool)
    energy, entropy, variance, homogeneity = cooccurrence_features(image, mask)
    assert energy == 1.0
    assert entropy == 0.0
    assert variance == 0.0
    assert homogeneity == 1.0


def test_checkerboard_frozen_values():
    image = checkerboard(4)
    mask = np.ones((4, 4), dtype=bool)
    energy, entropy, variance, homogeneity = cooccurrence_features(image, mask)
    # levels 0 and 31, all pairs cross-level: p = [[0, .5], [.5, 0]]
    assert energy == pytest.approx(0.5, abs=1e-15)
    assert entropy == pytest.approx(1.0, abs=1e-15)
    # marginal (.5, .5) at levels 0 and 31 -> mean 15.5, var 15.5^2
    assert variance == pytest.approx(240.25, abs=1e-12)
    assert homogeneity == pytest.approx(0.03125, abs=1e-15)


def test_matrix_is_symmetric_and_normalized():
    rng = np.random.default_rng(8)
    for _ in range(20):
        image, mask = random_image_and_mask(rng)
        try:
            p = glcm_matrix(image, mask)
        except DegenerateTextureError:
            continue
        assert p.shape == (32, 32)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(p, p.T)


def test_right_angle_rotation_invariance():
    rng = np.random.default_rng(21)
    image, mask = random_image_and_mask(rng, h=16, w=12)
    base = cooccurrence_features(image, mask)
    for k in (1, 2, 3):
        rot = cooccurrence_features(
            np.rot90(image, k, axes=(0, 1)), np.rot90(mask, k)
        )
        assert np.all(np.abs(rot - base) <= 1e-12)


def test_pairs_must_be_inside_mask():
    # two masked pixels separated by a gap produce no pair
    image = np.zeros((3, 3), dtype=np.uint8)
    mask = np.zeros((3, 3), dtype=bool)
    mask[0, 0] = True
    mask[2, 2] = True
    with pytest.raises(DegenerateTextureError):
        glcm_matrix(image, mask)


def test_single_pixel_mask_is_degenerate():
    image = np.zeros((3, 3), dtype=np.uint8)
    mask = np.zeros((3, 3), dtype=bool)
    mask[1, 1] = True
    with pytest.raises(DegenerateTextureError):
        glcm_matrix(image, mask)


def test_empty_mask_rejected():
    image = np.zeros((3, 3), dtype=np.uint8)
    with pytest.raises(EmptyRegionError):
        glcm_matrix(image, np.zeros((3, 3), dtype=bool))


def test_shape_mismatch_rejected():
    image = np.zeros((3, 3), dtype=np.uint8)
    with pytest.raises(ShapeMismatchError):
        glcm_matrix(image, np.ones((4, 3), dtype=bool))


def test_rgb_and_grayscale_quantization():
    # gray RGB pixels quantize like the same-valued grayscale image
    gray = np.full((4, 4), 130, dtype=np.uint8)
    rgb = np.stack([gray] * 3, axis=2)
    mask = np.ones((4, 4), dtype=bool)
    assert np.array_equal(glcm_matrix(gray, mask), glcm_matrix(rgb, mask))


def test_two_level_boundary_counts():
    # left half level 0, right half level 31: hand-count the pairs.
    # down pairs: (0,0) x2, (31,31) x2; right pairs per row: (0,0),
    # (0,31), (31,31) -> raw totals (0,0)=4, (31,31)=4, (0,31)=2;
    # symmetric accumulation doubles everything to a grand total of 20.
    image = np.zeros((2, 4), dtype=np.uint8)
    image[:, 2:] = 255
    mask = np.ones((2, 4), dtype=bool)
    p = glcm_matrix(image, mask)
    assert p[0, 0] == pytest.approx(0.4, abs=1e-15)
    assert p[31, 31] == pytest.approx(0.4, abs=1e-15)
    assert p[0, 31] == pytest.approx(0.1, abs=1e-15)
    assert p[31, 0] == pytest.approx(0.1, abs=1e-15)
