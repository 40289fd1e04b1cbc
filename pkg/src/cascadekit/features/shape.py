"""Binary-mask geometry: size, boundary, symmetry, and ellipse fit.

All quantities derive from pixel centers, so they are exact functions
of the mask raster. Axis lengths come from the moment-equivalent
ellipse (the ellipse with the mask's second central moments); symmetry
is the Dice overlap between the mask and its reflection about the
principal axis.
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyRegionError

__all__ = ["SHAPE_FEATURE_NAMES", "shape_features"]

SHAPE_FEATURE_NAMES = (
    "area",
    "perimeter",
    "symmetry",
    "major_axis",
    "minor_axis",
    "ellipse_diff",
    "eccentricity",
)


def _moments(ys, xs):
    cy, cx = ys.mean(), xs.mean()
    dy, dx = ys - cy, xs - cx
    mu20 = np.mean(dx * dx)
    mu02 = np.mean(dy * dy)
    mu11 = np.mean(dx * dy)
    return cy, cx, mu20, mu02, mu11


def shape_features(mask: np.ndarray) -> np.ndarray:
    """Seven geometry values for a binary mask, see SHAPE_FEATURE_NAMES."""
    mask = np.asarray(mask).astype(bool)
    if mask.ndim != 2:
        raise EmptyRegionError("mask must be a 2-d array")
    if not mask.any():
        raise EmptyRegionError("mask selects no pixels")

    area = float(mask.sum())

    # Perimeter counts masked pixels with at least one background
    # 4-neighbor; beyond the image edge counts as background.
    mpad = np.pad(mask, 1, constant_values=False)
    h, w = mask.shape
    on_edge = np.zeros_like(mask)
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        on_edge |= ~mpad[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
    perimeter = float((mask & on_edge).sum())

    ys, xs = np.nonzero(mask)
    ys = ys.astype(float)
    xs = xs.astype(float)
    cy, cx, mu20, mu02, mu11 = _moments(ys, xs)

    cov = np.array([[mu20, mu11], [mu11, mu02]])
    lam2, lam1 = np.linalg.eigvalsh(cov)  # ascending
    lam1 = max(float(lam1), 0.0)
    lam2 = max(float(lam2), 0.0)
    major_axis = 4.0 * np.sqrt(lam1)
    minor_axis = 4.0 * np.sqrt(lam2)
    if lam1 <= 0.0:
        eccentricity = 0.0
    else:
        ratio = min(1.0, max(lam2 / lam1, 1e-12))
        eccentricity = float(np.sqrt(1.0 - ratio))

    theta = 0.5 * np.arctan2(2.0 * mu11, mu20 - mu02)

    # Reflect pixel centers about the principal axis through the
    # centroid, round back onto the raster, then Dice-overlap.
    c2, s2 = np.cos(2.0 * theta), np.sin(2.0 * theta)
    dx, dy = xs - cx, ys - cy
    rx = np.rint(cx + c2 * dx + s2 * dy).astype(int)
    ry = np.rint(cy + s2 * dx - c2 * dy).astype(int)
    original = set(zip(ys.astype(int).tolist(), xs.astype(int).tolist()))
    reflected = set(zip(ry.tolist(), rx.tolist()))
    inter = len(original & reflected)
    symmetry = 2.0 * inter / (len(original) + len(reflected))

    # Rasterize the moment ellipse by center inclusion and count the
    # symmetric difference. Semi-axes are floored at half a pixel so a
    # degenerate mask still rasterizes its own centroid.
    a = max(major_axis / 2.0, 0.5)
    b = max(minor_axis / 2.0, 0.5)
    ct, st = np.cos(theta), np.sin(theta)
    pad = int(np.ceil(max(a, b))) + 2
    y0 = min(int(ys.min()), int(np.floor(cy)) - pad)
    y1 = max(int(ys.max()), int(np.ceil(cy)) + pad)
    x0 = min(int(xs.min()), int(np.floor(cx)) - pad)
    x1 = max(int(xs.max()), int(np.ceil(cx)) + pad)
    gy, gx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    gdx = gx - cx
    gdy = gy - cy
    u = (gdx * ct + gdy * st) / a
    v = (-gdx * st + gdy * ct) / b
    ellipse = u * u + v * v <= 1.0
    canvas = np.zeros_like(ellipse)
    canvas[ys.astype(int) - y0, xs.astype(int) - x0] = True
    ellipse_diff = float(np.logical_xor(canvas, ellipse).sum()) / area

    return np.array(
        [area, perimeter, symmetry, major_axis, minor_axis, ellipse_diff, eccentricity]
    )
