"""Benchmark protocol: repeated stratified splits, technique comparison,
bin sweeps, and report documents.

Every repetition draws a fresh stratified split with a seed derived
from (base seed + repetition index); splitting, error-guided selection,
and the random baseline consume distinct derived streams so changing
one never perturbs another. Raw per-repetition results are always kept
in the report, and the aggregate block is computed from them, so means
and deviations can be re-derived from the persisted document.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .classifiers.multiclass import (
    DEFAULT_C_GRID,
    DEFAULT_GAMMA_GRID,
    STRONG_C_GRID,
    STRONG_GAMMA_GRID,
    classify,
    grid_search,
)
from .classifiers.opf import classify_opf, train_opf
from .classifiers.strong import strong_train
from .datasets import (
    Dataset,
    SyntheticSpec,
    balance_training,
    generate_synthetic,
    load_dataset,
    stratified_split,
)
from .errors import ValidationError
from .features.extract import Standardizer
from .hybrid import estimate_error_histograms, route
from .metrics import cohen_kappa, confusion_matrix, overall_accuracy, per_class_accuracy

__all__ = [
    "TECHNIQUES",
    "derive_seed",
    "ExperimentConfig",
    "ExperimentReport",
    "BinSweepReport",
    "run_experiment",
    "sweep_bins",
    "case_analysis",
    "split_fingerprint",
]

TECHNIQUES = ("ds1", "ds2", "hybrid", "hybrid-rs", "opf", "ova", "ovo")

_STREAMS = {"data": 0, "split": 1, "balance": 2, "selection": 3, "rs": 4}


def derive_seed(base: int, rep: int, stream: str) -> int:
    """Per-repetition seed: base + rep selects the repetition, the
    stream label selects an independent substream."""
    seq = np.random.SeedSequence((base + rep, _STREAMS[stream]))
    return int(seq.generate_state(1)[0])


def split_fingerprint(split) -> str:
    payload = "||".join(
        ",".join(sorted(part)) for part in (split.z1, split.z2, split.z3)
    )
    return hashlib.sha1(payload.encode()).hexdigest()[:16]


@dataclass
class ExperimentConfig:
    """Everything a benchmark run depends on, JSON-serializable so the
    report can echo it verbatim."""

    synthetic: SyntheticSpec | None = None
    dataset_path: str | None = None
    techniques: tuple = ("ds1", "ds2", "hybrid", "hybrid-rs")
    repetitions: int = 10
    base_seed: int = 0
    fractions: tuple = (0.4, 0.3, 0.3)
    balance: bool = False
    bins: int = 10
    budget_fraction: float = 0.10
    smoothing: bool = False
    fast_view: str | None = None
    slow_view: str | None = None
    kernel: str = "rbf"
    fast_C: tuple = DEFAULT_C_GRID
    fast_gamma: tuple = DEFAULT_GAMMA_GRID
    slow_C: tuple = STRONG_C_GRID
    slow_gamma: tuple = STRONG_GAMMA_GRID
    slow_delay: float = 0.0
    measure_time: bool = True

    def __post_init__(self):
        self.techniques = tuple(t.lower() for t in self.techniques)
        for t in self.techniques:
            if t not in TECHNIQUES:
                raise ValidationError(
                    f"unknown technique {t!r}; valid: {', '.join(TECHNIQUES)}"
                )
        if self.synthetic is None and self.dataset_path is None:
            raise ValidationError("config needs a synthetic spec or a dataset path")
        if not 0.0 <= self.budget_fraction <= 1.0:
            raise ValidationError("budget_fraction must lie in [0, 1]")

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.synthetic is not None:
            doc["synthetic"] = asdict(self.synthetic)
            doc["synthetic"]["counts"] = list(self.synthetic.counts)
        for key in ("techniques", "fractions", "fast_C", "fast_gamma",
                    "slow_C", "slow_gamma"):
            doc[key] = list(doc[key])
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if doc.get("synthetic"):
            syn = dict(doc["synthetic"])
            syn["counts"] = tuple(syn["counts"])
            doc["synthetic"] = SyntheticSpec(**syn)
        for key in ("techniques", "fractions", "fast_C", "fast_gamma",
                    "slow_C", "slow_gamma"):
            if key in doc and doc[key] is not None:
                doc[key] = tuple(doc[key])
        return cls(**doc)


def _resolve_dataset(config: ExperimentConfig) -> Dataset:
    if config.synthetic is not None:
        return generate_synthetic(
            config.synthetic, derive_seed(config.base_seed, 0, "data")
        )
    return load_dataset(config.dataset_path)


def _resolve_views(dataset: Dataset, config: ExperimentConfig):
    fast, slow = config.fast_view, config.slow_view
    if dataset.feature_views:
        if fast is None and "degraded" in dataset.feature_views:
            fast = "degraded"
        if slow is None and "clean" in dataset.feature_views:
            slow = "clean"
    return fast, slow


@dataclass
class _RepContext:
    rep: int
    split: object
    y2: np.ndarray
    y3: np.ndarray
    Xf1: np.ndarray
    Xf2: np.ndarray
    Xf3: np.ndarray
    Xs1: np.ndarray
    Xs3: np.ndarray
    y1: np.ndarray
    fast_result: object
    z2_assignments: list
    strong: object | None
    fingerprint: str
    selection_seed: int
    rs_seed: int


def _prepare_rep(dataset: Dataset, config: ExperimentConfig, rep: int) -> _RepContext:
    split_seed = derive_seed(config.base_seed, rep, "split")
    split = stratified_split(dataset, config.fractions, split_seed)
    if config.balance:
        split = balance_training(
            split, dataset, derive_seed(config.base_seed, rep, "balance")
        )
    fast_view, slow_view = _resolve_views(dataset, config)

    def matrices(view):
        X1 = dataset.feature_matrix(split.z1, view)
        X2 = dataset.feature_matrix(split.z2, view)
        X3 = dataset.feature_matrix(split.z3, view)
        scaler = Standardizer.fit(X1)
        return scaler.transform(X1), scaler.transform(X2), scaler.transform(X3)

    Xf1, Xf2, Xf3 = matrices(fast_view)
    y1 = dataset.labels(split.z1)
    y2 = dataset.labels(split.z2)
    y3 = dataset.labels(split.z3)

    fast_result = grid_search(
        Xf1, y1, dataset.m, Xf2, y2,
        strategy="probabilistic", kernel=config.kernel,
        C_values=config.fast_C, gamma_values=config.fast_gamma,
    )
    z2_assignments = classify(fast_result.model, Xf2, split.z2)

    strong = None
    needs_strong = {"ds2", "hybrid", "hybrid-rs"} & set(config.techniques)
    if needs_strong:
        Xs1, Xs2, Xs3 = matrices(slow_view)
        strong = strong_train(
            Xs1, y1, dataset.m, Xs2, y2,
            kernel=config.kernel,
            C_values=config.slow_C, gamma_values=config.slow_gamma,
            delay=config.slow_delay,
        )
    else:
        Xs1, Xs3 = Xf1, Xf3

    return _RepContext(
        rep=rep, split=split, y1=y1, y2=y2, y3=y3,
        Xf1=Xf1, Xf2=Xf2, Xf3=Xf3, Xs1=Xs1, Xs3=Xs3,
        fast_result=fast_result, z2_assignments=z2_assignments,
        strong=strong, fingerprint=split_fingerprint(split),
        selection_seed=derive_seed(config.base_seed, rep, "selection"),
        rs_seed=derive_seed(config.base_seed, rep, "rs"),
    )


def case_analysis(outcomes, truth_by_id) -> tuple[float | None, float | None]:
    """Among routed samples: case 1 is the share (percent) of
    fast-correct samples the slow stage flipped to wrong; case 2 is the
    share of fast-wrong samples it fixed. None when the denominator is
    empty."""
    fast_correct_total = fast_correct_broken = 0
    fast_wrong_total = fast_wrong_fixed = 0
    for o in outcomes:
        if not o.routed:
            continue
        truth = truth_by_id[o.sample_id]
        if o.fast.label == truth:
            fast_correct_total += 1
            if o.slow.label != truth:
                fast_correct_broken += 1
        else:
            fast_wrong_total += 1
            if o.slow.label == truth:
                fast_wrong_fixed += 1
    case1 = (
        100.0 * fast_correct_broken / fast_correct_total
        if fast_correct_total else None
    )
    case2 = (
        100.0 * fast_wrong_fixed / fast_wrong_total if fast_wrong_total else None
    )
    return case1, case2


def _metrics_from_labels(y_true, y_pred, m) -> dict:
    cm = confusion_matrix(y_true, y_pred, m)
    return {
        "kappa": cohen_kappa(cm),
        "accuracy": overall_accuracy(cm),
        "per_class": [
            None if np.isnan(v) else float(v) for v in per_class_accuracy(cm)
        ],
    }


def _evaluate_rep(
    ctx: _RepContext, dataset: Dataset, config: ExperimentConfig, slow_stage
) -> dict:
    m = dataset.m
    z3_ids = ctx.split.z3
    truth_by_id = dict(zip(z3_ids, ctx.y3))
    budget = int(round(config.budget_fraction * len(z3_ids)))
    results: dict = {}
    timing = config.measure_time

    fast_assignments = None
    for tech in config.techniques:
        if tech == "ds1":
            t0 = time.perf_counter()
            fast_assignments = classify(ctx.fast_result.model, ctx.Xf3, z3_ids)
            elapsed = (time.perf_counter() - t0) * 1000.0
            entry = _metrics_from_labels(
                ctx.y3, [a.label for a in fast_assignments], m
            )
            if timing:
                entry["time_ms"] = elapsed / len(z3_ids)
            entry["C"] = ctx.fast_result.C
            entry["gamma"] = ctx.fast_result.gamma
            results[tech] = entry
        elif tech == "ds2":
            t0 = time.perf_counter()
            slow_assignments = slow_stage.classify(ctx.Xs3, z3_ids)
            elapsed = (time.perf_counter() - t0) * 1000.0
            entry = _metrics_from_labels(
                ctx.y3, [a.label for a in slow_assignments], m
            )
            if timing:
                entry["time_ms"] = elapsed / len(z3_ids)
            results[tech] = entry
        elif tech in ("hybrid", "hybrid-rs"):
            guided = tech == "hybrid"
            hist = estimate_error_histograms(
                ctx.z2_assignments, ctx.y2, config.bins, m,
                smoothing=config.smoothing,
            )
            result = route(
                z3_ids, ctx.Xf3, ctx.Xs3,
                ctx.fast_result.model, slow_stage,
                hist, budget,
                ctx.selection_seed if guided else ctx.rs_seed,
                method="error-guided" if guided else "random",
            )
            entry = _metrics_from_labels(ctx.y3, result.final_labels(), m)
            if timing:
                entry["time_ms"] = result.mean_ms_per_sample
            entry["routed"] = result.n_routed
            case1, case2 = case_analysis(result.outcomes, truth_by_id)
            entry["case1"] = case1
            entry["case2"] = case2
            results[tech] = entry
        elif tech == "opf":
            model = train_opf(ctx.Xf1, ctx.y1).calibrate(ctx.Xf2)
            t0 = time.perf_counter()
            assignments = classify_opf(model, ctx.Xf3, z3_ids)
            elapsed = (time.perf_counter() - t0) * 1000.0
            entry = _metrics_from_labels(ctx.y3, [a.label for a in assignments], m)
            if timing:
                entry["time_ms"] = elapsed / len(z3_ids)
            results[tech] = entry
        elif tech in ("ova", "ovo"):
            res = grid_search(
                ctx.Xf1, ctx.y1, m, ctx.Xf2, ctx.y2,
                strategy=tech, kernel=config.kernel,
                C_values=config.fast_C, gamma_values=config.fast_gamma,
            )
            t0 = time.perf_counter()
            assignments = classify(res.model, ctx.Xf3, z3_ids)
            elapsed = (time.perf_counter() - t0) * 1000.0
            entry = _metrics_from_labels(ctx.y3, [a.label for a in assignments], m)
            if timing:
                entry["time_ms"] = elapsed / len(z3_ids)
            entry["C"] = res.C
            entry["gamma"] = res.gamma
            results[tech] = entry
    return results


def _aggregate(reps: list[dict], techniques) -> dict:
    out: dict = {}
    for tech in techniques:
        rows = [r["results"][tech] for r in reps if tech in r["results"]]
        if not rows:
            continue
        agg: dict = {}
        for key in ("kappa", "accuracy", "time_ms", "routed", "case1", "case2"):
            values = [r[key] for r in rows if r.get(key) is not None]
            if values:
                agg[f"{key}_mean"] = float(np.mean(values))
                agg[f"{key}_std"] = float(np.std(values))
        per_class = [r["per_class"] for r in rows]
        if per_class:
            arr = np.array(
                [[np.nan if v is None else v for v in row] for row in per_class]
            )
            with np.errstate(invalid="ignore"):
                means = np.nanmean(arr, axis=0)
                stds = np.nanstd(arr, axis=0)
            agg["per_class_mean"] = [
                None if np.isnan(v) else float(v) for v in means
            ]
            agg["per_class_std"] = [
                None if np.isnan(v) else float(v) for v in stds
            ]
        out[tech] = agg
    return out


@dataclass
class ExperimentReport:
    config: dict
    dataset_name: str
    m: int
    n_samples: int
    reps: list[dict]
    aggregates: dict = field(default_factory=dict)

    def recompute_aggregates(self) -> dict:
        return _aggregate(self.reps, self.config["techniques"])

    def to_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_json(cls, path: str) -> "ExperimentReport":
        with open(path) as fh:
            return cls(**json.load(fh))

    def render_text(self) -> str:
        lines = [
            f"dataset: {self.dataset_name}  (m={self.m}, n={self.n_samples})",
            f"repetitions: {len(self.reps)}   bins: {self.config['bins']}   "
            f"budget: {self.config['budget_fraction']:.0%} of z3",
            "",
            f"{'technique':<10} {'kappa':>16} {'accuracy':>16} "
            f"{'ms/sample':>20} {'routed':>7} {'case1%':>7} {'case2%':>7}",
        ]
        for tech in self.config["techniques"]:
            agg = self.aggregates.get(tech)
            if not agg:
                continue
            kappa = f"{agg['kappa_mean']:.3f} +/- {agg['kappa_std']:.3f}"
            acc = f"{agg['accuracy_mean']:.3f} +/- {agg['accuracy_std']:.3f}"
            ms = (
                f"{agg['time_ms_mean']:.3f} +/- {agg['time_ms_std']:.3f}"
                if "time_ms_mean" in agg else "-"
            )
            routed = (
                f"{agg['routed_mean']:.1f}" if "routed_mean" in agg else "-"
            )
            case1 = f"{agg['case1_mean']:.2f}" if "case1_mean" in agg else "-"
            case2 = f"{agg['case2_mean']:.2f}" if "case2_mean" in agg else "-"
            lines.append(
                f"{tech:<10} {kappa:>16} {acc:>16} {ms:>20} {routed:>7} "
                f"{case1:>7} {case2:>7}"
            )
        lines.append("")
        lines.append("per-class accuracy (mean over repetitions):")
        for tech in self.config["techniques"]:
            agg = self.aggregates.get(tech)
            if not agg or "per_class_mean" not in agg:
                continue
            cells = " ".join(
                "  nan" if v is None else f"{v:.3f}"
                for v in agg["per_class_mean"]
            )
            lines.append(f"  {tech:<10} {cells}")
        return "\n".join(lines) + "\n"


def run_experiment(
    config: ExperimentConfig, slow_stage_factory=None
) -> ExperimentReport:
    """Run the full protocol and aggregate.

    slow_stage_factory optionally replaces the in-process slow stage:
    it receives (strong_classifier, rep) and returns the object whose
    classify() the router calls; the default uses it directly.
    """
    dataset = _resolve_dataset(config)
    reps: list[dict] = []
    for rep in range(config.repetitions):
        try:
            ctx = _prepare_rep(dataset, config, rep)
            slow_stage = ctx.strong
            if slow_stage is not None and slow_stage_factory is not None:
                slow_stage = slow_stage_factory(ctx.strong, rep)
            try:
                results = _evaluate_rep(ctx, dataset, config, slow_stage)
            finally:
                if slow_stage is not ctx.strong and hasattr(slow_stage, "close"):
                    slow_stage.close()
        except Exception as exc:
            first = exc.args[0] if exc.args else exc
            exc.args = (f"repetition {rep}: {first}",) + tuple(exc.args[1:])
            raise
        reps.append(
            {
                "rep": rep,
                "split_seed": derive_seed(config.base_seed, rep, "split"),
                "split_fingerprint": ctx.fingerprint,
                "fast_C": ctx.fast_result.C,
                "fast_gamma": ctx.fast_result.gamma,
                "results": results,
            }
        )
    report = ExperimentReport(
        config=config.to_dict(),
        dataset_name=dataset.name,
        m=dataset.m,
        n_samples=len(dataset),
        reps=reps,
    )
    report.aggregates = report.recompute_aggregates()
    return report


@dataclass
class BinSweepReport:
    config: dict
    bin_values: list[int]
    cells: list[dict]  # one per (rep, n): kappa, split fingerprint
    aggregates: dict = field(default_factory=dict)
    best_n: int | None = None

    def to_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1)
            fh.write("\n")

    def render_text(self) -> str:
        lines = [f"bin sweep over n in {self.bin_values}", ""]
        lines.append(f"{'bins':>5} {'hybrid kappa':>20}")
        for n in self.bin_values:
            agg = self.aggregates[str(n)]
            lines.append(
                f"{n:>5} {agg['kappa_mean']:.3f} +/- {agg['kappa_std']:.3f}"
                f"{'   <- best' if n == self.best_n else ''}"
            )
        return "\n".join(lines) + "\n"


def sweep_bins(
    config: ExperimentConfig, bin_values=(10, 20, 30), slow_stage_factory=None
) -> BinSweepReport:
    """Hybrid kappa as a function of the bin count.

    Within one repetition every bin count reuses the identical split,
    fast model, and slow stage; only the histogram and selection
    change. The per-cell split fingerprints prove the sharing.
    """
    dataset = _resolve_dataset(config)
    cells: list[dict] = []
    for rep in range(config.repetitions):
        ctx = _prepare_rep(dataset, config, rep)
        slow_stage = ctx.strong
        if slow_stage_factory is not None:
            slow_stage = slow_stage_factory(ctx.strong, rep)
        budget = int(round(config.budget_fraction * len(ctx.split.z3)))
        try:
            for n in bin_values:
                hist = estimate_error_histograms(
                    ctx.z2_assignments, ctx.y2, n, dataset.m,
                    smoothing=config.smoothing,
                )
                result = route(
                    ctx.split.z3, ctx.Xf3, ctx.Xs3,
                    ctx.fast_result.model, slow_stage,
                    hist, budget, ctx.selection_seed, method="error-guided",
                )
                cm = confusion_matrix(ctx.y3, result.final_labels(), dataset.m)
                cells.append(
                    {
                        "rep": rep,
                        "bins": n,
                        "kappa": cohen_kappa(cm),
                        "split_fingerprint": ctx.fingerprint,
                        "routed": result.n_routed,
                    }
                )
        finally:
            if slow_stage is not ctx.strong and hasattr(slow_stage, "close"):
                slow_stage.close()

    aggregates = {}
    best_n, best_mean = None, -np.inf
    for n in bin_values:
        kappas = [c["kappa"] for c in cells if c["bins"] == n]
        aggregates[str(n)] = {
            "kappa_mean": float(np.mean(kappas)),
            "kappa_std": float(np.std(kappas)),
        }
        if np.mean(kappas) > best_mean:
            best_mean, best_n = float(np.mean(kappas)), n
    return BinSweepReport(
        config=config.to_dict(),
        bin_values=list(bin_values),
        cells=cells,
        aggregates=aggregates,
        best_n=best_n,
    )
