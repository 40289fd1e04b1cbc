"""Border/interior color descriptor.

Colors are quantized to a 4x4x4 RGB cube (64 colors). Every masked
pixel is classified as border or interior: border when any 4-neighbor
has a different quantized color or lies outside the mask (pixels beyond
the image edge count as outside). The descriptor is the border histogram
followed by the interior histogram, both log-compressed, 128 values.
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyRegionError, ShapeMismatchError

__all__ = ["quantize_colors", "bic_raw_histograms", "bic_descriptor"]


def quantize_colors(image: np.ndarray) -> np.ndarray:
    """Map an 8-bit RGB image to indices in 0..63 (2 bits per channel)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeMismatchError("expected an RGB image of shape (h, w, 3)")
    img = image.astype(np.int64) // 64
    return img[..., 0] * 16 + img[..., 1] * 4 + img[..., 2]


def _log_compress(counts: np.ndarray) -> np.ndarray:
    """floor(log2(count) + 1), zero maps to zero, capped at 9."""
    out = np.zeros(len(counts), dtype=float)
    nz = counts > 0
    out[nz] = np.floor(np.log2(counts[nz]) + 1.0)
    return np.minimum(out, 9.0)


def bic_raw_histograms(image: np.ndarray, mask: np.ndarray):
    """Pre-compression (border, interior) integer histograms.

    Together the two histograms count every masked pixel exactly once,
    so their grand total equals the mask area.
    """
    mask = np.asarray(mask).astype(bool)
    image = np.asarray(image)
    if image.shape[:2] != mask.shape:
        raise ShapeMismatchError(
            f"image {image.shape[:2]} and mask {mask.shape} disagree"
        )
    if not mask.any():
        raise EmptyRegionError("mask selects no pixels")

    q = quantize_colors(image)

    # A padded frame of out-of-mask cells makes image edges count as
    # mask boundary without special cases.
    mpad = np.pad(mask, 1, constant_values=False)
    qpad = np.pad(q, 1, constant_values=-1)
    h, w = mask.shape
    border = np.zeros_like(mask)
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb_mask = mpad[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        nb_q = qpad[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        border |= ~nb_mask | (nb_q != q)
    border &= mask
    interior = mask & ~border

    return (
        np.bincount(q[border].ravel(), minlength=64).astype(np.int64),
        np.bincount(q[interior].ravel(), minlength=64).astype(np.int64),
    )


def bic_descriptor(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """128-value border/interior color histogram of the masked region."""
    border_hist, interior_hist = bic_raw_histograms(image, mask)
    return np.concatenate([_log_compress(border_hist), _log_compress(interior_hist)])
