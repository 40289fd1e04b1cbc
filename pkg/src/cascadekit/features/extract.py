"""Feature assembly: descriptors, standardization, per-dimension weights.

The full descriptor of an image/mask pair is bic (128) followed by
shape (7) and texture (4), 139 values. Standardization statistics must
come from the training partition only and are then applied everywhere;
weights multiply standardized dimensions, so a zero weight removes a
dimension and doubling all weights rescales distances uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..datasets import Sample
from ..errors import MissingInputError, ValidationError
from .bic import bic_descriptor
from .shape import shape_features
from .texture import cooccurrence_features

__all__ = [
    "FeatureVector",
    "Standardizer",
    "FeaturePipeline",
    "raw_descriptor",
    "extract_features",
    "load_image",
    "load_mask",
]

RAW_LAYOUT = {"bic": (0, 128), "shape": (128, 135), "texture": (135, 139)}


@dataclass
class FeatureVector:
    """A raw descriptor with named blocks."""

    values: np.ndarray
    layout: dict[str, tuple[int, int]]

    def block(self, name: str) -> np.ndarray:
        lo, hi = self.layout[name]
        return self.values[lo:hi]


def load_image(path: str) -> np.ndarray:
    import os

    if not os.path.exists(path):
        raise MissingInputError(f"image not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def load_mask(path: str) -> np.ndarray:
    import os

    if not os.path.exists(path):
        raise MissingInputError(f"mask not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("L")) > 127


def raw_descriptor(image: np.ndarray, mask: np.ndarray) -> FeatureVector:
    """Concatenated bic, shape, and texture blocks for one object."""
    values = np.concatenate(
        [
            bic_descriptor(image, mask),
            shape_features(mask),
            cooccurrence_features(image, mask),
        ]
    )
    return FeatureVector(values=values, layout=dict(RAW_LAYOUT))


@dataclass
class Standardizer:
    """Per-dimension (x - mean) / std with zero stds treated as 1."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValidationError("need a non-empty 2-d matrix to fit")
        std = X.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return cls(mean=X.mean(axis=0), std=std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.mean):
            raise ValidationError(
                f"expected {len(self.mean)} dimensions, got {X.shape[-1]}"
            )
        return (X - self.mean) / self.std


def _check_weights(weights, dim: int) -> np.ndarray:
    if weights is None:
        return np.ones(dim)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (dim,):
        raise ValidationError(f"expected {dim} weights, got shape {weights.shape}")
    if np.any(weights < 0):
        raise ValidationError("weights must be non-negative")
    return weights


def extract_features(sample: Sample, weights=None, standardizer: Standardizer = None):
    """Final feature vector of one sample: raw values (tabular or image
    descriptor), standardized with training statistics, then weighted."""
    if sample.features is not None:
        raw = np.asarray(sample.features, dtype=float)
    elif sample.image_path and sample.mask_path:
        raw = raw_descriptor(
            load_image(sample.image_path), load_mask(sample.mask_path)
        ).values
    else:
        raise ValidationError(f"sample {sample.id!r} has neither features nor images")
    if standardizer is not None:
        raw = standardizer.transform(raw)
    return raw * _check_weights(weights, len(raw))


class FeaturePipeline:
    """Fit standardization on the training partition, transform anywhere.

    Raw descriptors are cached per sample id because image decoding
    dominates the cost of repeated transforms during weight search.
    """

    def __init__(self):
        self.standardizer: Standardizer | None = None
        self._cache: dict[str, np.ndarray] = {}

    def _raw(self, sample: Sample) -> np.ndarray:
        if sample.id not in self._cache:
            self._cache[sample.id] = extract_features(sample)
        return self._cache[sample.id]

    def raw_matrix(self, samples) -> np.ndarray:
        return np.asarray([self._raw(s) for s in samples], dtype=float)

    def fit(self, train_samples) -> "FeaturePipeline":
        self.standardizer = Standardizer.fit(self.raw_matrix(train_samples))
        return self

    def transform(self, samples, weights=None) -> np.ndarray:
        if self.standardizer is None:
            raise ValidationError("pipeline is not fitted")
        X = self.standardizer.transform(self.raw_matrix(samples))
        return X * _check_weights(weights, X.shape[1])
