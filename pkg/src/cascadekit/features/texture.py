"""Gray-level co-occurrence statistics over a masked region.

Luminance (Rec. 601 weights) is quantized to 32 fixed levels. Pairs are
collected for the right and down offsets, accumulated symmetrically into
one matrix, and normalized. The four summary statistics are the ones
that survive feature selection on this kind of data: energy, entropy,
variance, homogeneity.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTextureError, EmptyRegionError, ShapeMismatchError

__all__ = ["TEXTURE_FEATURE_NAMES", "glcm_matrix", "cooccurrence_features"]

TEXTURE_FEATURE_NAMES = ("energy", "entropy", "variance", "homogeneity")

LEVELS = 32


def _quantize_luma(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[2] == 3:
        img = image.astype(float)
        luma = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    elif image.ndim == 2:
        luma = image.astype(float)
    else:
        raise ShapeMismatchError("expected an RGB or grayscale image")
    levels = np.floor(luma * LEVELS / 256.0).astype(int)
    return np.clip(levels, 0, LEVELS - 1)


def glcm_matrix(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Normalized symmetric co-occurrence matrix (32 x 32) for offsets
    (1, 0) and (0, 1), both pixels inside the mask."""
    mask = np.asarray(mask).astype(bool)
    image = np.asarray(image)
    if image.shape[:2] != mask.shape:
        raise ShapeMismatchError(
            f"image {image.shape[:2]} and mask {mask.shape} disagree"
        )
    if not mask.any():
        raise EmptyRegionError("mask selects no pixels")
    levels = _quantize_luma(image)

    counts = np.zeros((LEVELS, LEVELS), dtype=np.int64)
    pairs = 0
    for dr, dc in ((1, 0), (0, 1)):
        a_mask = mask[: mask.shape[0] - dr, : mask.shape[1] - dc]
        b_mask = mask[dr:, dc:]
        valid = a_mask & b_mask
        a = levels[: mask.shape[0] - dr, : mask.shape[1] - dc][valid]
        b = levels[dr:, dc:][valid]
        np.add.at(counts, (a, b), 1)
        np.add.at(counts, (b, a), 1)
        pairs += a.size
    if pairs == 0:
        raise DegenerateTextureError("mask contains no adjacent pixel pair")
    return counts / counts.sum()


def cooccurrence_features(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """(energy, entropy, variance, homogeneity) of the masked GLCM."""
    p = glcm_matrix(image, mask)

    energy = float(np.sum(p * p))

    nz = p[p > 0]
    # + 0.0 turns the -0.0 of an empty sum into plain zero
    entropy = float(-np.sum(nz * np.log2(nz)) + 0.0)

    # The matrix is symmetric, so row and column marginals coincide.
    marginal = p.sum(axis=1)
    idx = np.arange(LEVELS, dtype=float)
    mu = float(np.sum(idx * marginal))
    variance = float(np.sum((idx - mu) ** 2 * marginal))

    i = idx[:, None]
    j = idx[None, :]
    homogeneity = float(np.sum(p / (1.0 + np.abs(i - j))))

    return np.array([energy, entropy, variance, homogeneity])
