"""Classifier stack: binary SVM, calibration, multiclass strategies,
an optimum-path baseline, and the slow-stage wrappers."""

from .adapter import ExternalStrongClassifier
from .base import Assignment, StrongClassifier
from .coupling import pairwise_coupling
from .multiclass import (
    DEFAULT_C_GRID,
    DEFAULT_GAMMA_GRID,
    STRONG_C_GRID,
    STRONG_GAMMA_GRID,
    GridSearchResult,
    MulticlassModel,
    PairModel,
    classify,
    grid_search,
    train_multiclass,
)
from .opf import OpfModel, classify_opf, train_opf
from .persist import load_model, save_model
from .platt import platt_calibrate, platt_probability
from .strong import StrongSvmClassifier, strong_train
from .svm import BinarySvmModel, dual_objective, kernel_matrix, train_binary_svm

__all__ = [
    "Assignment",
    "StrongClassifier",
    "BinarySvmModel",
    "train_binary_svm",
    "kernel_matrix",
    "dual_objective",
    "platt_calibrate",
    "platt_probability",
    "pairwise_coupling",
    "MulticlassModel",
    "PairModel",
    "train_multiclass",
    "classify",
    "grid_search",
    "GridSearchResult",
    "DEFAULT_C_GRID",
    "DEFAULT_GAMMA_GRID",
    "STRONG_C_GRID",
    "STRONG_GAMMA_GRID",
    "OpfModel",
    "train_opf",
    "classify_opf",
    "StrongSvmClassifier",
    "strong_train",
    "ExternalStrongClassifier",
    "save_model",
    "load_model",
]
