"""Error-guided routing between a fast and a slow classifier.

The fast stage labels everything and reports a confidence. On the
validation partition, its mistakes are histogrammed per (predicted
class, confidence bin): p_error[j, i] estimates how often a prediction
of class j at bin i is wrong. At test time a budget of M samples is
spent on the cells most likely to be wrong; the slow stage re-labels
the selected samples and its verdict is final.

Cell quotas follow ceil(M * p_error), capped by cell population and by
the remaining budget, walking cells in decreasing p_error order (ties:
lower bin, then lower class). A second pass in the same order fills any
unused budget regardless of quotas, so exactly min(M, N) samples route.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers.base import Assignment
from .classifiers.multiclass import MulticlassModel, classify
from .errors import (
    AdapterError,
    CalibrationError,
    CalibrationMismatchError,
    RoutingError,
    ValidationError,
)

__all__ = [
    "bin_index",
    "bin_assignments",
    "ErrorHistogram",
    "estimate_error_histograms",
    "SelectionPlan",
    "PlanEntry",
    "select_for_reclassification",
    "random_selection",
    "RoutingOutcome",
    "RoutingResult",
    "route",
]


def bin_index(confidence: float, n: int) -> int:
    """1-based confidence bin: floor(c * n) + 1, with c = 1 pinned to
    bin n. Evaluated in float64 exactly as written, so a confidence
    whose product with n lands just under an integer stays in the lower
    bin (e.g. 0.3 * 10 -> 2.999.. -> bin 3)."""
    if not 0.0 <= confidence <= 1.0:
        raise ValidationError(f"confidence {confidence} outside [0, 1]")
    if n < 1:
        raise ValidationError("bin count must be positive")
    if confidence == 1.0:
        return n
    return int(math.floor(confidence * n)) + 1


def bin_assignments(assignments: list[Assignment], n: int) -> list[Assignment]:
    """Tag assignments with their confidence bin (in place) and return them."""
    for a in assignments:
        a.bin = bin_index(a.confidence, n)
        a.bin_count = n
    return assignments


@dataclass
class ErrorHistogram:
    """Per (predicted class, confidence bin) error statistics.

    counts[j-1, i-1] is how many validation samples were predicted as
    class j with confidence in bin i; errors counts the wrong ones among
    them; p_error is their ratio. Empty cells get 0 unless Laplace
    smoothing was requested, in which case every cell uses
    (errors + 1) / (counts + 2).
    """

    n: int
    m: int
    counts: np.ndarray
    errors: np.ndarray
    p_error: np.ndarray
    smoothing: bool = False

    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    def to_dict(self) -> dict:
        return {
            "format": "cascadekit-error-histogram",
            "version": 1,
            "n": self.n,
            "m": self.m,
            "smoothing": self.smoothing,
            "counts": self.counts.tolist(),
            "errors": self.errors.tolist(),
            "p_error": [[float(v) for v in row] for row in self.p_error],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorHistogram":
        if doc.get("format") != "cascadekit-error-histogram":
            raise ValidationError("not an error-histogram document")
        return cls(
            n=doc["n"],
            m=doc["m"],
            counts=np.asarray(doc["counts"], dtype=np.int64),
            errors=np.asarray(doc["errors"], dtype=np.int64),
            p_error=np.asarray(doc["p_error"], dtype=float),
            smoothing=doc.get("smoothing", False),
        )


def estimate_error_histograms(
    assignments: list[Assignment],
    true_labels,
    n: int,
    m: int,
    smoothing: bool = False,
) -> ErrorHistogram:
    """Build the error histogram from validation assignments and their
    ground-truth labels (aligned sequences)."""
    true_labels = np.asarray(true_labels, dtype=int)
    if len(assignments) == 0:
        raise CalibrationError("no validation assignments to calibrate on")
    if len(assignments) != len(true_labels):
        raise ValidationError("assignments and labels disagree in length")
    counts = np.zeros((m, n), dtype=np.int64)
    errors = np.zeros((m, n), dtype=np.int64)
    for a, truth in zip(assignments, true_labels):
        if not 1 <= a.label <= m:
            raise ValidationError(f"predicted label {a.label} outside 1..{m}")
        i = bin_index(a.confidence, n)
        counts[a.label - 1, i - 1] += 1
        if a.label != truth:
            errors[a.label - 1, i - 1] += 1
    if smoothing:
        p = (errors + 1.0) / (counts + 2.0)
    else:
        with np.errstate(invalid="ignore"):
            p = np.where(counts > 0, errors / np.maximum(counts, 1), 0.0)
    return ErrorHistogram(
        n=n, m=m, counts=counts, errors=errors, p_error=p, smoothing=smoothing
    )


@dataclass
class PlanEntry:
    """One cell visit. quota is the ceil(M * p_error) target for the
    quota pass and 0 for fill-pass visits."""

    class_label: int
    bin: int
    p_error: float
    quota: int
    ids: list[str]
    pass_name: str = "quota"


@dataclass
class SelectionPlan:
    budget: int
    seed: int
    method: str
    entries: list[PlanEntry] = field(default_factory=list)

    @property
    def selected_ids(self) -> list[str]:
        out: list[str] = []
        for e in self.entries:
            out.extend(e.ids)
        return out

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "seed": self.seed,
            "method": self.method,
            "entries": [
                {
                    "class": e.class_label,
                    "bin": e.bin,
                    "p_error": float(e.p_error),
                    "quota": e.quota,
                    "ids": list(e.ids),
                    "pass": e.pass_name,
                }
                for e in self.entries
            ],
        }


def _cell_members(assignments: list[Assignment], hist: ErrorHistogram):
    cells: dict[tuple[int, int], list[str]] = {}
    for a in assignments:
        if a.bin_count is not None and a.bin_count != hist.n:
            raise CalibrationMismatchError(
                f"assignments binned with n={a.bin_count}, histogram has n={hist.n}"
            )
        i = a.bin if a.bin_count == hist.n and a.bin is not None else bin_index(
            a.confidence, hist.n
        )
        cells.setdefault((a.label, i), []).append(a.sample_id)
    return cells


def _cell_order(hist: ErrorHistogram):
    """All (class, bin) cells by decreasing p_error; ties prefer the
    lower bin, then the lower class."""
    cells = [
        (j + 1, i + 1, float(hist.p_error[j, i]))
        for j in range(hist.m)
        for i in range(hist.n)
    ]
    cells.sort(key=lambda c: (-c[2], c[1], c[0]))
    return cells


def _draw(rng, members: list[str], k: int) -> list[str]:
    """k members uniformly without replacement, keeping original order."""
    if k >= len(members):
        return list(members)
    picked = rng.choice(len(members), size=k, replace=False)
    return [members[i] for i in sorted(picked)]


def select_for_reclassification(
    assignments: list[Assignment],
    hist: ErrorHistogram,
    M: int,
    seed: int,
) -> SelectionPlan:
    """Spend a budget of M samples on the most error-prone cells."""
    if M < 0:
        raise ValidationError("budget must be non-negative")
    plan = SelectionPlan(budget=M, seed=seed, method="error-guided")
    if M == 0 or not assignments:
        return plan
    rng = np.random.default_rng(seed)
    cells = _cell_members(assignments, hist)
    order = _cell_order(hist)
    remaining = {key: list(ids) for key, ids in cells.items()}
    budget = min(M, len(assignments))

    for class_label, bin_i, p_err in order:
        if budget <= 0:
            break
        members = remaining.get((class_label, bin_i))
        if not members:
            continue
        quota = min(math.ceil(M * p_err), len(members), budget)
        if quota <= 0:
            continue
        drawn = _draw(rng, members, quota)
        plan.entries.append(
            PlanEntry(
                class_label=class_label, bin=bin_i, p_error=p_err,
                quota=quota, ids=drawn,
            )
        )
        taken = set(drawn)
        remaining[(class_label, bin_i)] = [x for x in members if x not in taken]
        budget -= len(drawn)

    if budget > 0:
        for class_label, bin_i, p_err in order:
            if budget <= 0:
                break
            members = remaining.get((class_label, bin_i))
            if not members:
                continue
            drawn = _draw(rng, members, min(budget, len(members)))
            plan.entries.append(
                PlanEntry(
                    class_label=class_label, bin=bin_i, p_error=p_err,
                    quota=0, ids=drawn, pass_name="fill",
                )
            )
            taken = set(drawn)
            remaining[(class_label, bin_i)] = [x for x in members if x not in taken]
            budget -= len(drawn)
    return plan


def random_selection(
    assignments: list[Assignment], M: int, seed: int
) -> SelectionPlan:
    """Uniform baseline: min(M, N) assignments without replacement."""
    if M < 0:
        raise ValidationError("budget must be non-negative")
    plan = SelectionPlan(budget=M, seed=seed, method="random")
    if M == 0 or not assignments:
        return plan
    rng = np.random.default_rng(seed)
    ids = [a.sample_id for a in assignments]
    drawn = _draw(rng, ids, min(M, len(ids)))
    plan.entries.append(
        PlanEntry(class_label=0, bin=0, p_error=0.0, quota=len(drawn), ids=drawn)
    )
    return plan


@dataclass
class RoutingOutcome:
    sample_id: str
    fast: Assignment
    routed: bool
    slow: Assignment | None
    final_label: int
    elapsed_ms: float


@dataclass
class RoutingResult:
    outcomes: list[RoutingOutcome]
    plan: SelectionPlan
    fast_ms: float
    select_ms: float
    slow_ms: float

    @property
    def n_routed(self) -> int:
        return sum(1 for o in self.outcomes if o.routed)

    @property
    def total_ms(self) -> float:
        return self.fast_ms + self.select_ms + self.slow_ms

    @property
    def mean_ms_per_sample(self) -> float:
        return self.total_ms / max(len(self.outcomes), 1)

    def final_labels(self) -> np.ndarray:
        return np.array([o.final_label for o in self.outcomes], dtype=int)


def route(
    ids,
    X_fast,
    X_slow,
    fast_model: MulticlassModel,
    slow,
    hist: ErrorHistogram | None,
    M: int,
    seed: int,
    method: str = "error-guided",
) -> RoutingResult:
    """Classify everything with the fast model, route min(M, N) samples
    to the slow stage, and take the slow verdict as final for them.

    X_fast and X_slow are the two stages' feature views of the same
    batch, aligned with ids. A slow-stage transport failure raises
    RoutingError carrying the outcomes of the unrouted samples, whose
    fast labels remain valid.
    """
    ids = list(ids)
    X_fast = np.atleast_2d(np.asarray(X_fast, dtype=float))
    X_slow = np.atleast_2d(np.asarray(X_slow, dtype=float))
    if len(ids) != len(X_fast) or len(ids) != len(X_slow):
        raise ValidationError("ids and feature views disagree in length")

    t0 = time.perf_counter()
    fast_assignments = classify(fast_model, X_fast, ids)
    fast_ms = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    if method == "error-guided":
        if hist is None:
            raise ValidationError("error-guided routing needs a histogram")
        plan = select_for_reclassification(fast_assignments, hist, M, seed)
    elif method == "random":
        plan = random_selection(fast_assignments, M, seed)
    else:
        raise ValidationError(f"unknown selection method {method!r}")
    selected = plan.selected_ids
    select_ms = (time.perf_counter() - t0) * 1000.0

    index_of = {sid: k for k, sid in enumerate(ids)}
    routed_idx = [index_of[sid] for sid in selected]

    slow_ms = 0.0
    slow_by_id: dict[str, Assignment] = {}
    if routed_idx:
        t0 = time.perf_counter()
        try:
            slow_assignments = slow.classify(X_slow[routed_idx], selected)
        except AdapterError as exc:
            routed_set = set(selected)
            partial = [
                RoutingOutcome(
                    sample_id=a.sample_id, fast=a, routed=False, slow=None,
                    final_label=a.label, elapsed_ms=fast_ms / len(ids),
                )
                for a in fast_assignments
                if a.sample_id not in routed_set
            ]
            raise RoutingError(
                f"slow stage failed mid-batch: {exc}",
                partial=partial,
                failed_ids=selected,
            ) from exc
        slow_ms = (time.perf_counter() - t0) * 1000.0
        slow_by_id = {a.sample_id: a for a in slow_assignments}

    per_sample_fast = fast_ms / max(len(ids), 1)
    per_sample_slow = slow_ms / max(len(routed_idx), 1)
    outcomes = []
    for a in fast_assignments:
        slow_a = slow_by_id.get(a.sample_id)
        routed = slow_a is not None
        outcomes.append(
            RoutingOutcome(
                sample_id=a.sample_id,
                fast=a,
                routed=routed,
                slow=slow_a,
                final_label=slow_a.label if routed else a.label,
                elapsed_ms=per_sample_fast + (per_sample_slow if routed else 0.0),
            )
        )
    return RoutingResult(
        outcomes=outcomes, plan=plan,
        fast_ms=fast_ms, select_ms=select_ms, slow_ms=slow_ms,
    )
