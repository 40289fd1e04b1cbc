"""The built-in slow, accurate stage.

A probabilistic SVM tuned on the validation partition with a finer
gamma lattice than the fast stage, wrapped with an optional artificial
per-sample delay so timing experiments can emulate a heavyweight model
without shipping one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .base import Assignment
from .multiclass import (
    STRONG_C_GRID,
    STRONG_GAMMA_GRID,
    MulticlassModel,
    classify,
    grid_search,
)

__all__ = ["StrongSvmClassifier", "strong_train"]


@dataclass
class StrongSvmClassifier:
    """Multiclass model plus a per-sample delay in seconds."""

    model: MulticlassModel
    delay: float = 0.0

    @property
    def m(self) -> int:
        return self.model.m

    def classify(self, X, ids=None) -> list[Assignment]:
        assignments = classify(self.model, X, ids)
        if self.delay > 0 and len(assignments):
            time.sleep(self.delay * len(assignments))
        return assignments


def strong_train(
    X_train,
    y_train,
    m: int,
    X_val,
    y_val,
    kernel: str = "rbf",
    C_values=STRONG_C_GRID,
    gamma_values=STRONG_GAMMA_GRID,
    delay: float = 0.0,
) -> StrongSvmClassifier:
    """Grid-search a probabilistic SVM for the slow stage."""
    result = grid_search(
        X_train, y_train, m, X_val, y_val,
        strategy="probabilistic", kernel=kernel,
        C_values=C_values, gamma_values=gamma_values,
    )
    return StrongSvmClassifier(model=result.model, delay=delay)
