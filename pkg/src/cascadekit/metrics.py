"""Agreement metrics and the per-sample timing probe."""

from __future__ import annotations

import time

import numpy as np

__all__ = [
    "confusion_matrix",
    "cohen_kappa",
    "per_class_accuracy",
    "overall_accuracy",
    "time_per_sample",
]


def confusion_matrix(true_labels, predicted_labels, m: int) -> np.ndarray:
    """m x m count matrix, rows = true class, columns = predicted class.
    Labels are 1-based."""
    true_labels = np.asarray(true_labels, dtype=int)
    predicted_labels = np.asarray(predicted_labels, dtype=int)
    if true_labels.shape != predicted_labels.shape:
        raise ValueError("label vectors differ in length")
    for v in (true_labels, predicted_labels):
        if v.size and (v.min() < 1 or v.max() > m):
            raise ValueError(f"labels outside 1..{m}")
    cm = np.zeros((m, m), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        cm[t - 1, p - 1] += 1
    return cm


def overall_accuracy(cm: np.ndarray) -> float:
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm) / total)


def cohen_kappa(cm: np.ndarray) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    When expected agreement is 1 (both marginals concentrate in a single
    class) the ratio is undefined; it is pinned to 1 for perfect observed
    agreement and 0 otherwise.
    """
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    p_o = np.trace(cm) / total
    p_e = float(np.sum(cm.sum(axis=0) * cm.sum(axis=1))) / (total * total)
    if p_e >= 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def per_class_accuracy(cm: np.ndarray) -> np.ndarray:
    """Recall per class. Classes with no true samples yield NaN, which
    downstream means must skip rather than count as zero."""
    cm = np.asarray(cm, dtype=float)
    row_sums = cm.sum(axis=1)
    out = np.full(cm.shape[0], np.nan)
    nonzero = row_sums > 0
    out[nonzero] = np.diag(cm)[nonzero] / row_sums[nonzero]
    return out


def time_per_sample(phase, batch) -> tuple[float, float]:
    """Wall-clock one call of `phase` per batch element, serially.

    Returns (mean, std) in milliseconds. Serial single-sample calls keep
    slow-stage delays from overlapping, at the price of charging any
    per-call overhead to every sample; use it for comparisons, not
    absolute throughput claims.
    """
    times = []
    for item in batch:
        t0 = time.perf_counter()
        phase(item)
        times.append((time.perf_counter() - t0) * 1000.0)
    if not times:
        raise ValueError("empty batch")
    arr = np.asarray(times)
    return float(arr.mean()), float(arr.std())
