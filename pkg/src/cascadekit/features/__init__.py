"""Handcrafted image descriptors and the feature weighting pipeline."""

from .bic import bic_descriptor, quantize_colors
from .extract import (
    FeaturePipeline,
    FeatureVector,
    Standardizer,
    extract_features,
    load_image,
    load_mask,
    raw_descriptor,
)
from .msps import MspsResult, knn_cv_evaluator, msps_optimize
from .shape import SHAPE_FEATURE_NAMES, shape_features
from .texture import TEXTURE_FEATURE_NAMES, cooccurrence_features, glcm_matrix

__all__ = [
    "bic_descriptor",
    "quantize_colors",
    "shape_features",
    "SHAPE_FEATURE_NAMES",
    "cooccurrence_features",
    "glcm_matrix",
    "TEXTURE_FEATURE_NAMES",
    "FeatureVector",
    "FeaturePipeline",
    "Standardizer",
    "raw_descriptor",
    "extract_features",
    "load_image",
    "load_mask",
    "MspsResult",
    "msps_optimize",
    "knn_cv_evaluator",
]
