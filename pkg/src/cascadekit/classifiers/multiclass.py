"""Multiclass strategies on top of the binary SVM.

Three strategies share one model container:
  ova            one model per class against the rest; winner by
                 decision value, confidence from a softmax over values.
  ovo            one model per class pair; winner by majority vote,
                 ties by summed signed decision values; confidence is
                 the winner's share of its m-1 duels.
  probabilistic  pairwise models with sigmoid-calibrated outputs
                 coupled into a class distribution; winner by largest
                 probability, which doubles as the confidence.

Calibration decision values come from a 3-fold internal split of the
training data, so the sigmoid never sees in-sample decision values of
the model it calibrates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError, ValidationError
from ..metrics import cohen_kappa, confusion_matrix
from .base import Assignment
from .coupling import pairwise_coupling
from .platt import platt_calibrate, platt_probability
from .svm import BinarySvmModel, train_binary_svm

__all__ = [
    "MulticlassModel",
    "PairModel",
    "train_multiclass",
    "classify",
    "GridSearchResult",
    "grid_search",
    "DEFAULT_C_GRID",
    "DEFAULT_GAMMA_GRID",
    "STRONG_C_GRID",
    "STRONG_GAMMA_GRID",
]

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_GRID = tuple(2.0**e for e in range(-7, 4, 2))

# The slow stage searches the same C range over a twice-as-fine gamma lattice.
STRONG_C_GRID = DEFAULT_C_GRID
STRONG_GAMMA_GRID = tuple(2.0**e for e in range(-7, 4, 1))

_PROB_CLIP = 1e-7


@dataclass
class PairModel:
    """Binary model for classes (i, j); positive decision favors i."""

    class_i: int
    class_j: int
    svm: BinarySvmModel
    platt: tuple[float, float] | None = None


@dataclass
class MulticlassModel:
    strategy: str
    m: int
    kernel: str
    C: float
    gamma: float | None
    per_class: list[BinarySvmModel] = field(default_factory=list)
    pairs: list[PairModel] = field(default_factory=list)

    @property
    def dim(self) -> int:
        models = self.per_class or [p.svm for p in self.pairs]
        return models[0].sv_X.shape[1]


def _check_training_inputs(X, y, m):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if len(X) != len(y):
        raise TrainingError("features and labels disagree in length")
    present = set(np.unique(y).tolist())
    for k in range(1, m + 1):
        if k not in present:
            raise TrainingError(f"class {k} is absent from the training partition")
    if present - set(range(1, m + 1)):
        raise TrainingError(f"labels outside 1..{m}")
    return X, y


def _cv_decision_values(Xp, yp, kernel, C, gamma, folds=3):
    """Out-of-fold decision values for calibration. Folds are assigned
    round-robin within each class, so every training fold keeps both
    classes as long as each class has two samples or more."""
    n = len(yp)
    fold_of = np.empty(n, dtype=int)
    for cls in (-1, 1):
        idx = np.nonzero(yp == cls)[0]
        fold_of[idx] = np.arange(len(idx)) % folds
    if min((yp == 1).sum(), (yp == -1).sum()) < 2:
        # Too small to hold out; calibrate on in-sample values instead.
        model = train_binary_svm(Xp, yp, kernel=kernel, C=C, gamma=gamma)
        return model.decision(Xp), yp
    decisions = np.empty(n)
    for f in range(folds):
        test = fold_of == f
        model = train_binary_svm(
            Xp[~test], yp[~test], kernel=kernel, C=C, gamma=gamma
        )
        decisions[test] = model.decision(Xp[test])
    return decisions, yp


def train_multiclass(
    X,
    y,
    m: int,
    strategy: str = "probabilistic",
    kernel: str = "rbf",
    C: float = 1.0,
    gamma: float | None = None,
    cv_folds: int = 3,
) -> MulticlassModel:
    """Train all submodels of the chosen strategy on labels 1..m."""
    X, y = _check_training_inputs(X, y, m)
    model = MulticlassModel(strategy=strategy, m=m, kernel=kernel, C=C, gamma=gamma)

    if strategy == "ova":
        for k in range(1, m + 1):
            yk = np.where(y == k, 1.0, -1.0)
            model.per_class.append(
                train_binary_svm(X, yk, kernel=kernel, C=C, gamma=gamma)
            )
        return model

    if strategy in ("ovo", "probabilistic"):
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                sel = (y == i) | (y == j)
                Xp = X[sel]
                yp = np.where(y[sel] == i, 1.0, -1.0)
                platt = None
                if strategy == "probabilistic":
                    dec, lab = _cv_decision_values(
                        Xp, yp, kernel, C, gamma, folds=cv_folds
                    )
                    platt = platt_calibrate(dec, lab)
                svm = train_binary_svm(Xp, yp, kernel=kernel, C=C, gamma=gamma)
                model.pairs.append(
                    PairModel(class_i=i, class_j=j, svm=svm, platt=platt)
                )
        return model

    raise ValidationError(f"unknown strategy {strategy!r}")


def _softmax(values: np.ndarray) -> np.ndarray:
    shifted = values - values.max()
    e = np.exp(shifted)
    return e / e.sum()


def classify(model: MulticlassModel, X, ids=None) -> list[Assignment]:
    """Assign a label and confidence to every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise ValidationError(
            f"expected {model.dim} feature dimensions, got {X.shape[1]}"
        )
    n = len(X)
    if ids is None:
        ids = [str(i) for i in range(n)]
    elif len(ids) != n:
        raise ValidationError("ids and feature rows disagree in length")

    out: list[Assignment] = []
    if model.strategy == "ova":
        decisions = np.column_stack([mm.decision(X) for mm in model.per_class])
        for row, sid in zip(decisions, ids):
            k = int(np.argmax(row))
            probs = _softmax(row)
            out.append(
                Assignment(
                    sample_id=sid,
                    label=k + 1,
                    confidence=float(probs[k]),
                    probs=probs,
                )
            )
        return out

    pair_decisions = np.column_stack([p.svm.decision(X) for p in model.pairs])

    if model.strategy == "ovo":
        for row, sid in zip(pair_decisions, ids):
            votes = np.zeros(model.m)
            sums = np.zeros(model.m)
            for p, f in zip(model.pairs, row):
                if f >= 0:
                    votes[p.class_i - 1] += 1
                else:
                    votes[p.class_j - 1] += 1
                sums[p.class_i - 1] += f
                sums[p.class_j - 1] -= f
            best = votes.max()
            tied = np.nonzero(votes == best)[0]
            if len(tied) > 1:
                k = int(tied[np.argmax(sums[tied])])
            else:
                k = int(tied[0])
            out.append(
                Assignment(
                    sample_id=sid,
                    label=k + 1,
                    confidence=float(votes[k] / (model.m - 1)),
                )
            )
        return out

    if model.strategy == "probabilistic":
        for row, sid in zip(pair_decisions, ids):
            r = np.full((model.m, model.m), 0.5)
            for p, f in zip(model.pairs, row):
                A, B = p.platt
                prob_i = float(platt_probability(f, A, B))
                prob_i = min(max(prob_i, _PROB_CLIP), 1.0 - _PROB_CLIP)
                r[p.class_i - 1, p.class_j - 1] = prob_i
                r[p.class_j - 1, p.class_i - 1] = 1.0 - prob_i
            probs = pairwise_coupling(r)
            k = int(np.argmax(probs))
            out.append(
                Assignment(
                    sample_id=sid,
                    label=k + 1,
                    confidence=float(probs[k]),
                    probs=probs,
                )
            )
        return out

    raise ValidationError(f"unknown strategy {model.strategy!r}")


@dataclass
class GridSearchResult:
    C: float
    gamma: float | None
    kappa: float
    model: MulticlassModel
    table: list[dict]
    failures: list[dict]


def grid_search(
    X_train,
    y_train,
    m: int,
    X_val,
    y_val,
    strategy: str = "probabilistic",
    kernel: str = "rbf",
    C_values=DEFAULT_C_GRID,
    gamma_values=DEFAULT_GAMMA_GRID,
) -> GridSearchResult:
    """Pick (C, gamma) maximizing kappa on the validation partition.

    The grid runs in ascending (C, gamma) order and keeps strictly
    better cells only, so ties resolve toward smaller C, then smaller
    gamma. Cells whose training fails are recorded and skipped; if every
    cell fails the last error propagates.
    """
    if kernel == "linear":
        gamma_values = (None,)
    y_val = np.asarray(y_val, dtype=int)
    best = None
    table: list[dict] = []
    failures: list[dict] = []
    last_error: Exception | None = None
    for C in sorted(C_values):
        for gamma in sorted(gamma_values, key=lambda g: (g is not None, g)):
            try:
                model = train_multiclass(
                    X_train, y_train, m, strategy=strategy,
                    kernel=kernel, C=C, gamma=gamma,
                )
                predicted = [a.label for a in classify(model, X_val)]
                kappa = cohen_kappa(confusion_matrix(y_val, predicted, m))
            except Exception as exc:  # cell failed, search goes on
                failures.append({"C": C, "gamma": gamma, "error": str(exc)})
                last_error = exc
                continue
            table.append({"C": C, "gamma": gamma, "kappa": kappa})
            if best is None or kappa > best.kappa:
                best = GridSearchResult(
                    C=C, gamma=gamma, kappa=kappa, model=model,
                    table=table, failures=failures,
                )
    if best is None:
        raise TrainingError(
            f"every grid cell failed; last error: {last_error}"
        )
    best.table = table
    best.failures = failures
    return best
