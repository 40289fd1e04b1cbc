"""Optimum-path forest classifier, used as a parameter-free baseline.

Training builds the minimum spanning tree of the training set and marks
both endpoints of every edge joining different classes as prototypes.
Each training sample then gets the cheapest path cost from the
prototype set, where a path costs its largest edge. A test sample takes
the training sample minimizing max(cost(t), d(t, s)); ties resolve by
smaller distance, then smaller index, so a training sample always wins
its own query. Confidence is one minus the winning cost normalized by
the largest winning cost seen during calibration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError, ValidationError
from .base import Assignment

__all__ = ["OpfModel", "train_opf", "classify_opf"]


def _distance_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.sqrt(np.maximum(sq, 0.0))


def _prim_mst(D: np.ndarray) -> list[tuple[int, int]]:
    """Prim from node 0 with ties broken toward lower index."""
    n = len(D)
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=int)
    in_tree[0] = True
    best_dist[~in_tree] = D[0][~in_tree]
    best_from[:] = 0
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        candidates = np.nonzero(~in_tree)[0]
        v = int(candidates[np.argmin(best_dist[candidates])])
        edges.append((int(best_from[v]), v))
        in_tree[v] = True
        closer = ~in_tree & (D[v] < best_dist)
        best_dist[closer] = D[v][closer]
        best_from[closer] = v
    return edges


@dataclass
class OpfModel:
    X: np.ndarray
    y: np.ndarray
    cost: np.ndarray
    root_label: np.ndarray
    prototypes: np.ndarray
    scale: float = 1.0

    def calibrate(self, X_val) -> "OpfModel":
        """Set the confidence normalizer to the largest winning cost on
        a validation batch."""
        values = _winning(self, np.atleast_2d(np.asarray(X_val, dtype=float)))[0]
        top = float(values.max()) if len(values) else 0.0
        self.scale = top if top > 0 else 1.0
        return self


def train_opf(X, y) -> OpfModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if len(X) != len(y) or len(y) < 2:
        raise TrainingError("need at least two labeled samples")
    if len(np.unique(y)) < 2:
        raise TrainingError("need at least two classes")

    D = _distance_matrix(X, X)
    edges = _prim_mst(D)
    n = len(y)
    prototypes = np.zeros(n, dtype=bool)
    for u, v in edges:
        if y[u] != y[v]:
            prototypes[u] = True
            prototypes[v] = True

    cost = np.full(n, np.inf)
    root_label = y.copy()
    cost[prototypes] = 0.0
    done = np.zeros(n, dtype=bool)
    for _ in range(n):
        pending = np.nonzero(~done)[0]
        u = int(pending[np.argmin(cost[pending])])
        done[u] = True
        relax = np.maximum(cost[u], D[u])
        better = ~done & (relax < cost)
        cost[better] = relax[better]
        root_label[better] = root_label[u]
    return OpfModel(
        X=X.copy(), y=y.copy(), cost=cost, root_label=root_label,
        prototypes=prototypes,
    )


def _winning(model: OpfModel, X: np.ndarray):
    """Winning value and winning training index for each row of X."""
    D = _distance_matrix(X, model.X)
    values = np.maximum(D, model.cost[None, :])
    n_train = len(model.y)
    win_value = np.empty(len(X))
    win_index = np.empty(len(X), dtype=int)
    order_keys = np.arange(n_train)
    for i in range(len(X)):
        # Lexicographic minimum over (value, distance, index).
        pick = np.lexsort((order_keys, D[i], values[i]))[0]
        win_value[i] = values[i][pick]
        win_index[i] = pick
    return win_value, win_index


def classify_opf(model: OpfModel, X, ids=None) -> list[Assignment]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.X.shape[1]:
        raise ValidationError(
            f"expected {model.X.shape[1]} feature dimensions, got {X.shape[1]}"
        )
    if ids is None:
        ids = [str(i) for i in range(len(X))]
    elif len(ids) != len(X):
        raise ValidationError("ids and feature rows disagree in length")
    values, indices = _winning(model, X)
    out = []
    for sid, val, idx in zip(ids, values, indices):
        conf = 1.0 - min(max(val / model.scale, 0.0), 1.0)
        out.append(
            Assignment(
                sample_id=sid, label=int(model.y[idx]), confidence=float(conf)
            )
        )
    return out
