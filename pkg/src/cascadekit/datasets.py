"""Datasets, stratified splitting, and the synthetic benchmark generator.

A Dataset is a flat list of Samples with integer labels 1..m. Samples
either carry a feature vector directly (tabular data) or reference an
image/mask pair on disk (manifest data). Splits are index-free: they
hold sample ids, so they survive save/load round trips.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MissingInputError,
    ParseError,
    StratificationError,
    ValidationError,
)

__all__ = [
    "Sample",
    "Dataset",
    "Split",
    "SyntheticSpec",
    "load_dataset",
    "save_dataset",
    "generate_synthetic",
    "stratified_split",
    "balance_training",
    "save_split",
    "load_split",
]


@dataclass
class Sample:
    """One labeled object: tabular features or an image/mask reference."""

    id: str
    label: int
    features: np.ndarray | None = None
    image_path: str | None = None
    mask_path: str | None = None


@dataclass
class Dataset:
    """A named collection of samples with labels in 1..m.

    feature_views optionally names column ranges of the feature matrix,
    e.g. {"clean": (0, 4), "degraded": (4, 8)} for synthetic data whose
    vectors carry two views of the same object.
    """

    name: str
    samples: list[Sample]
    m: int
    feature_views: dict[str, tuple[int, int]] | None = None

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise ValidationError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)
            if not 1 <= s.label <= self.m:
                raise ValidationError(
                    f"sample {s.id!r} has label {s.label}, expected 1..{self.m}"
                )

    def __len__(self):
        return len(self.samples)

    def class_counts(self) -> dict[int, int]:
        counts = {k: 0 for k in range(1, self.m + 1)}
        for s in self.samples:
            counts[s.label] += 1
        return counts

    def by_id(self, sample_id: str) -> Sample:
        try:
            return self._index[sample_id]
        except AttributeError:
            self._index = {s.id: s for s in self.samples}
            return self._index[sample_id]

    def subset(self, ids) -> list[Sample]:
        return [self.by_id(i) for i in ids]

    def feature_matrix(self, ids=None, view: str | None = None) -> np.ndarray:
        """Stack sample feature vectors into a matrix, optionally sliced
        to a named view. Samples without tabular features are rejected."""
        samples = self.samples if ids is None else self.subset(ids)
        rows = []
        for s in samples:
            if s.features is None:
                raise ValidationError(f"sample {s.id!r} has no tabular features")
            rows.append(s.features)
        X = np.asarray(rows, dtype=float)
        if view is not None:
            if not self.feature_views or view not in self.feature_views:
                raise ValidationError(f"unknown feature view {view!r}")
            lo, hi = self.feature_views[view]
            X = X[:, lo:hi]
        return X

    def labels(self, ids=None) -> np.ndarray:
        samples = self.samples if ids is None else self.subset(ids)
        return np.array([s.label for s in samples], dtype=int)


@dataclass
class Split:
    """Three disjoint id lists: z1 (training), z2 (validation), z3 (testing)."""

    z1: list[str]
    z2: list[str]
    z3: list[str]
    seed: int | None = None
    fractions: tuple[float, float, float] | None = None

    def partitions(self):
        return {"z1": self.z1, "z2": self.z2, "z3": self.z3}


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a Gaussian-mixture benchmark with paired feature views.

    Each sample's vector is the clean view followed by a degraded view
    (clean plus zero-mean noise with standard deviation ds1_noise), so a
    fast classifier can be handicapped relative to a strong one on the
    same objects. Class centers sit on scaled orthogonal axes, which
    needs dim >= m. By convention the last class is the majority
    "background" class, mirroring heavily imbalanced screening data.
    """

    counts: tuple[int, ...]
    dim: int = 0  # 0 means max(4, m)
    separation: float = 3.0
    ds1_noise: float = 0.0
    name: str = "synthetic"

    @property
    def m(self) -> int:
        return len(self.counts)

    def resolved_dim(self) -> int:
        return self.dim if self.dim > 0 else max(4, self.m)


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    """Draw a synthetic dataset. Deterministic: equal seed, equal bytes."""
    m = spec.m
    if m < 2:
        raise ValidationError("need at least two classes")
    if any(c < 1 for c in spec.counts):
        raise ValidationError("every class count must be positive")
    dim = spec.resolved_dim()
    if dim < m:
        raise ValidationError(f"dim {dim} cannot separate {m} classes")

    rng = np.random.default_rng(seed)
    centers = np.zeros((m, dim))
    for k in range(m):
        centers[k, k] = spec.separation

    samples = []
    idx = 0
    for k in range(m):
        n_k = spec.counts[k]
        clean = centers[k] + rng.normal(size=(n_k, dim))
        if spec.ds1_noise > 0:
            degraded = clean + rng.normal(scale=spec.ds1_noise, size=(n_k, dim))
        else:
            degraded = clean.copy()
        for row_clean, row_deg in zip(clean, degraded):
            samples.append(
                Sample(
                    id=f"s{idx:06d}",
                    label=k + 1,
                    features=np.concatenate([row_clean, row_deg]),
                )
            )
            idx += 1
    views = {"full": (0, 2 * dim), "clean": (0, dim), "degraded": (dim, 2 * dim)}
    return Dataset(name=spec.name, samples=samples, m=m, feature_views=views)


def load_dataset(path: str, fmt: str = "auto", name: str | None = None) -> Dataset:
    """Read a dataset from a tabular or manifest CSV.

    Tabular header: id,f1,...,fk,label. Manifest header:
    id,image_path,mask_path,label with paths relative to the file.
    fmt "auto" decides from the header.
    """
    if not os.path.exists(path):
        raise MissingInputError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", line=1) from None
        header = [h.strip() for h in header]
        if fmt == "auto":
            fmt = "manifest" if "image_path" in header else "tabular"
        if fmt == "tabular":
            if len(header) < 3 or header[0] != "id" or header[-1] != "label":
                raise ParseError("expected header id,f1,...,fk,label", line=1)
            k = len(header) - 2
            samples = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != k + 2:
                    raise ParseError(
                        f"expected {k + 2} fields, got {len(row)}", line=lineno
                    )
                try:
                    feats = np.array([float(v) for v in row[1:-1]])
                    label = int(row[-1])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from None
                samples.append(Sample(id=row[0], label=label, features=feats))
        elif fmt == "manifest":
            expected = ["id", "image_path", "mask_path", "label"]
            if header != expected:
                raise ParseError(
                    "expected header id,image_path,mask_path,label", line=1
                )
            base = os.path.dirname(os.path.abspath(path))
            samples = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise ParseError(f"expected 4 fields, got {len(row)}", line=lineno)
                img = os.path.join(base, row[1])
                msk = os.path.join(base, row[2])
                for p in (img, msk):
                    if not os.path.exists(p):
                        raise MissingInputError(f"referenced file not found: {p}")
                try:
                    label = int(row[3])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from None
                samples.append(
                    Sample(id=row[0], label=label, image_path=img, mask_path=msk)
                )
        else:
            raise ValueError(f"unknown format {fmt!r}")
    if not samples:
        raise ValidationError(f"empty dataset: {path}")
    m = max(s.label for s in samples)
    if min(s.label for s in samples) < 1:
        raise ValidationError("labels must be positive integers")
    return Dataset(name=name or os.path.basename(path), samples=samples, m=m)


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write tabular CSV. Feature floats use repr, so values round-trip."""
    k = None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for s in dataset.samples:
            if s.features is None:
                raise ValidationError(f"sample {s.id!r} has no tabular features")
            if k is None:
                k = len(s.features)
                writer.writerow(["id"] + [f"f{i + 1}" for i in range(k)] + ["label"])
            elif len(s.features) != k:
                raise ValidationError("inconsistent feature lengths")
            writer.writerow([s.id] + [repr(float(v)) for v in s.features] + [s.label])


def _largest_remainder(n: int, fractions) -> list[int]:
    """Integer allocation of n units over fractions. Floor everything,
    then hand leftovers to the largest remainders; remainder ties go to
    the later partition so the final slot absorbs rounding."""
    quotas = [n * f for f in fractions]
    base = [math.floor(q) for q in quotas]
    leftover = n - sum(base)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - base[i]), -i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def stratified_split(
    dataset: Dataset, fractions=(0.4, 0.3, 0.3), seed: int = 0
) -> Split:
    """Per-class stratified split into z1/z2/z3.

    Each class is shuffled with the seeded generator and cut by
    largest-remainder allocation, so every partition's class share is
    within one sample of its fraction. Classes run in label order, which
    makes the result a pure function of (dataset order, fractions, seed).
    """
    if len(fractions) != 3:
        raise ValueError("expected three fractions")
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")

    by_class: dict[int, list[str]] = {}
    for s in dataset.samples:
        by_class.setdefault(s.label, []).append(s.id)

    rng = np.random.default_rng(seed)
    z1, z2, z3 = [], [], []
    for label in sorted(by_class):
        ids = by_class[label]
        if len(ids) < 3:
            raise StratificationError(
                f"class {label} has {len(ids)} samples; need at least 3 to stratify"
            )
        ids = list(ids)
        rng.shuffle(ids)
        n1, n2, _ = _largest_remainder(len(ids), fractions)
        z1.extend(ids[:n1])
        z2.extend(ids[n1 : n1 + n2])
        z3.extend(ids[n1 + n2 :])
    return Split(z1=z1, z2=z2, z3=z3, seed=seed, fractions=tuple(fractions))


def balance_training(split: Split, dataset: Dataset, seed: int = 0) -> Split:
    """Subsample z1 so every class matches the smallest class count.

    Only z1 changes; z2/z3 pass through. Already-balanced input returns
    the same id set, so the operation is idempotent.
    """
    by_class: dict[int, list[str]] = {}
    for sid in split.z1:
        by_class.setdefault(dataset.by_id(sid).label, []).append(sid)
    if not by_class:
        raise ValidationError("empty training partition")
    floor = min(len(v) for v in by_class.values())
    rng = np.random.default_rng(seed)
    kept = []
    for label in sorted(by_class):
        ids = by_class[label]
        if len(ids) == floor:
            kept.extend(ids)
        else:
            pick = rng.choice(len(ids), size=floor, replace=False)
            kept.extend(ids[i] for i in sorted(pick))
    return Split(
        z1=kept, z2=list(split.z2), z3=list(split.z3),
        seed=split.seed, fractions=split.fractions,
    )


def save_split(split: Split, path: str) -> None:
    doc = {
        "format": "cascadekit-split",
        "version": 1,
        "seed": split.seed,
        "fractions": list(split.fractions) if split.fractions else None,
        "z1": list(split.z1),
        "z2": list(split.z2),
        "z3": list(split.z3),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_split(path: str) -> Split:
    if not os.path.exists(path):
        raise MissingInputError(f"split file not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=exc.lineno) from None
    if doc.get("format") != "cascadekit-split":
        raise ValidationError("not a split document")
    return Split(
        z1=list(doc["z1"]),
        z2=list(doc["z2"]),
        z3=list(doc["z3"]),
        seed=doc.get("seed"),
        fractions=tuple(doc["fractions"]) if doc.get("fractions") else None,
    )
