"""Shared classifier output types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np


@dataclass
class Assignment:
    """One classified sample: predicted label, confidence in [0, 1],
    optional per-class probabilities, optional confidence-bin tag."""

    sample_id: str
    label: int
    confidence: float
    probs: np.ndarray | None = None
    bin: int | None = None
    bin_count: int | None = None


@runtime_checkable
class StrongClassifier(Protocol):
    """Anything that can serve as the slow, accurate stage."""

    def classify(self, X, ids=None) -> list[Assignment]: ...
