"""Multi-scale parameter search over per-dimension feature weights.

Greedy coordinate search: starting from unit weights, every dimension
is perturbed up and down at several scales; the single best improving
perturbation is accepted and the sweep repeats. The accepted objective
sequence is therefore monotone non-decreasing by construction, and the
search stops as soon as no perturbation helps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

__all__ = ["MspsResult", "msps_optimize", "knn_cv_evaluator"]


@dataclass
class MspsResult:
    weights: np.ndarray
    objective: float
    history: list[float] = field(default_factory=list)
    evaluations: int = 0


def msps_optimize(
    X: np.ndarray,
    y: np.ndarray,
    evaluator=None,
    scales=(1.0, 0.5, 0.25),
    max_iters: int = 50,
) -> MspsResult:
    """Search feature weights maximizing evaluator(X * w, y).

    evaluator defaults to 3-fold cross-validated 1-NN accuracy. Weights
    are clamped to be non-negative. history records the objective after
    each accepted step, starting with the unit-weight value.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError("features and labels disagree")
    if not scales:
        raise ValidationError("need at least one perturbation scale")
    if evaluator is None:
        evaluator = knn_cv_evaluator()

    dim = X.shape[1]
    w = np.ones(dim)
    best = evaluator(X * w, y)
    history = [best]
    evaluations = 1

    for _ in range(max_iters):
        best_step = None
        best_gain = 0.0
        for d in range(dim):
            for delta in scales:
                for direction in (1.0, -1.0):
                    cand = w[d] + direction * delta
                    if cand < 0.0:
                        cand = 0.0
                    if cand == w[d]:
                        continue
                    trial = w.copy()
                    trial[d] = cand
                    score = evaluator(X * trial, y)
                    evaluations += 1
                    if score - best > best_gain:
                        best_gain = score - best
                        best_step = (d, cand, score)
        if best_step is None:
            break
        d, cand, score = best_step
        w[d] = cand
        best = score
        history.append(best)

    return MspsResult(weights=w, objective=best, history=history,
                      evaluations=evaluations)


def knn_cv_evaluator(folds: int = 3):
    """3-fold cross-validated 1-NN accuracy; weights act through the
    Euclidean distance on the weighted features. Folds are assigned
    round-robin by index, so the objective is deterministic."""

    def evaluate(Xw: np.ndarray, y: np.ndarray) -> float:
        n = len(y)
        if n < folds:
            raise ValidationError(f"need at least {folds} samples")
        fold_of = np.arange(n) % folds
        correct = 0
        for f in range(folds):
            test = fold_of == f
            train = ~test
            Xt, yt = Xw[train], y[train]
            for xi, yi in zip(Xw[test], y[test]):
                d2 = np.sum((Xt - xi) ** 2, axis=1)
                correct += int(yt[int(np.argmin(d2))] == yi)
        return correct / n

    return evaluate
