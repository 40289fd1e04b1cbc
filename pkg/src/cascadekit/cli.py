"""Command-line surface.

Subcommands: dataset gen|inspect|split, features extract, train,
calibrate, route, evaluate, sweep-bins, compare. Exit codes: 0 success,
1 usage or unexpected error, 2 data error, 3 convergence/calibration
error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

import numpy as np

from .classifiers.adapter import ExternalStrongClassifier
from .classifiers.multiclass import classify, grid_search, train_multiclass
from .classifiers.opf import OpfModel, classify_opf, train_opf
from .classifiers.persist import load_model, save_model
from .classifiers.strong import StrongSvmClassifier
from .datasets import (
    Dataset,
    Sample,
    SyntheticSpec,
    balance_training,
    generate_synthetic,
    load_dataset,
    load_split,
    save_dataset,
    save_split,
    stratified_split,
)
from .errors import DataError, NumericalError, ValidationError
from .experiment import (
    ExperimentConfig,
    case_analysis,
    run_experiment,
    sweep_bins,
)
from .features.extract import FeaturePipeline
from .hybrid import ErrorHistogram, estimate_error_histograms, route
from .metrics import (
    cohen_kappa,
    confusion_matrix,
    overall_accuracy,
    per_class_accuracy,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(","))


def _partition_ids(args, dataset) -> tuple[list, list, list]:
    """(z1, z2, z3) ids; without --split the whole file plays every role."""
    if args.split:
        split = load_split(args.split)
        return split.z1, split.z2, split.z3
    ids = [s.id for s in dataset.samples]
    return ids, ids, ids


def _build_parser() -> _Parser:
    parser = _Parser(prog="cascadekit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ds = sub.add_parser("dataset", help="generate, inspect, or split datasets")
    ds_sub = p_ds.add_subparsers(dest="dataset_command", required=True)

    p_gen = ds_sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("--counts", type=_ints, required=True,
                       help="per-class sample counts, e.g. 175,473")
    p_gen.add_argument("--dim", type=int, default=0)
    p_gen.add_argument("--separation", type=float, default=3.0)
    p_gen.add_argument("--noise", type=float, default=0.0,
                       help="std of the degradation applied to the fast view")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--name", default="synthetic")
    p_gen.add_argument("--view", choices=["full", "clean", "degraded"],
                       default="full", help="which feature columns to write")
    p_gen.add_argument("--out", required=True)

    p_inspect = ds_sub.add_parser("inspect", help="summarize a dataset file")
    p_inspect.add_argument("path")
    p_inspect.add_argument("--fmt", choices=["auto", "tabular", "manifest"],
                           default="auto")

    p_split = ds_sub.add_parser("split", help="stratified three-way split")
    p_split.add_argument("path")
    p_split.add_argument("--fractions", type=_floats, default=(0.4, 0.3, 0.3))
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--balance", action="store_true",
                         help="subsample z1 to the minority class size")
    p_split.add_argument("--out", required=True)

    p_feat = sub.add_parser("features", help="image feature extraction")
    feat_sub = p_feat.add_subparsers(dest="features_command", required=True)
    p_extract = feat_sub.add_parser(
        "extract", help="image manifest -> tabular descriptor file"
    )
    p_extract.add_argument("manifest")
    p_extract.add_argument("--out", required=True)
    p_extract.add_argument("--split", help="standardize on this split's z1")
    p_extract.add_argument("--weights",
                           help="JSON file with per-feature weights")
    p_extract.add_argument("--raw", action="store_true",
                           help="skip standardization")

    p_train = sub.add_parser("train", help="train a classifier")
    p_train.add_argument("data")
    p_train.add_argument("--strategy", default="probabilistic",
                         choices=["probabilistic", "ova", "ovo", "opf"])
    p_train.add_argument("--kernel", default="rbf", choices=["rbf", "linear"])
    p_train.add_argument("--C", type=_floats, default=(1.0,))
    p_train.add_argument("--gamma", type=_floats, default=None)
    p_train.add_argument("--split",
                         help="train on z1; grids select on z2")
    p_train.add_argument("--delay", type=float, default=0.0,
                         help="artificial per-sample delay in seconds")
    p_train.add_argument("--out", required=True)

    p_cal = sub.add_parser(
        "calibrate", help="estimate per-cell error probabilities on z2"
    )
    p_cal.add_argument("model")
    p_cal.add_argument("data")
    p_cal.add_argument("--split", required=True)
    p_cal.add_argument("--bins", type=int, default=10)
    p_cal.add_argument("--smoothing", action="store_true")
    p_cal.add_argument("--out", required=True)

    p_route = sub.add_parser(
        "route", help="classify z3, re-deciding a budgeted subset"
    )
    p_route.add_argument("data")
    p_route.add_argument("--fast-model", required=True)
    p_route.add_argument("--slow-model",
                         help="persisted model used as the slow stage")
    p_route.add_argument("--slow-command",
                         help="external server command line for the slow stage")
    p_route.add_argument("--hist", help="histogram document from calibrate")
    p_route.add_argument("--split")
    p_route.add_argument("--budget", type=int, default=None)
    p_route.add_argument("--budget-fraction", type=float, default=0.10)
    p_route.add_argument("--seed", type=int, default=0)
    p_route.add_argument("--method", default="error-guided",
                         choices=["error-guided", "random"])
    p_route.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="score a routing outcome file")
    p_eval.add_argument("outcomes")
    p_eval.add_argument("data")

    p_sweep = sub.add_parser("sweep-bins", help="hybrid kappa per bin count")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--bins", type=_ints, default=(10, 20, 30))
    p_sweep.add_argument("--out")

    p_cmp = sub.add_parser("compare", help="run the benchmark protocol")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--out")

    return parser


def _cmd_dataset_gen(args) -> int:
    spec = SyntheticSpec(
        counts=args.counts, dim=args.dim, separation=args.separation,
        ds1_noise=args.noise, name=args.name,
    )
    dataset = generate_synthetic(spec, args.seed)
    if args.view != "full":
        lo, hi = dataset.feature_views[args.view]
        samples = [
            Sample(id=s.id, label=s.label, features=s.features[lo:hi])
            for s in dataset.samples
        ]
        dataset = Dataset(name=dataset.name, samples=samples, m=dataset.m)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples to {args.out}")
    return 0


def _cmd_dataset_inspect(args) -> int:
    dataset = load_dataset(args.path, fmt=args.fmt)
    print(f"name: {dataset.name}")
    print(f"samples: {len(dataset)}")
    print(f"classes: {dataset.m}")
    for label, count in sorted(dataset.class_counts().items()):
        print(f"  class {label}: {count}")
    first = dataset.samples[0]
    if first.features is not None:
        print(f"feature dim: {len(first.features)}")
    else:
        print("kind: image manifest")
    return 0


def _cmd_dataset_split(args) -> int:
    dataset = load_dataset(args.path)
    split = stratified_split(dataset, args.fractions, args.seed)
    if args.balance:
        split = balance_training(split, dataset, args.seed)
    save_split(split, args.out)
    sizes = {k: len(v) for k, v in split.partitions().items()}
    print(f"wrote split {sizes} to {args.out}")
    return 0


def _cmd_features_extract(args) -> int:
    dataset = load_dataset(args.manifest, fmt="manifest")
    pipeline = FeaturePipeline()
    weights = None
    if args.weights:
        with open(args.weights) as fh:
            doc = json.load(fh)
        weights = doc["weights"] if isinstance(doc, dict) else doc
    if args.raw:
        X = pipeline.raw_matrix(dataset.samples)
        if weights is not None:
            X = X * np.asarray(weights, dtype=float)
    else:
        if args.split:
            split = load_split(args.split)
            pipeline.fit(dataset.subset(split.z1))
        else:
            pipeline.fit(dataset.samples)
        X = pipeline.transform(dataset.samples, weights=weights)
    out_samples = [
        Sample(id=s.id, label=s.label, features=row)
        for s, row in zip(dataset.samples, X)
    ]
    save_dataset(Dataset(name=dataset.name, samples=out_samples, m=dataset.m),
                 args.out)
    print(f"wrote {len(out_samples)} descriptors to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    z1, z2, _ = _partition_ids(args, dataset)
    X1 = dataset.feature_matrix(z1)
    y1 = dataset.labels(z1)

    if args.strategy == "opf":
        model = train_opf(X1, y1)
        if args.split:
            model = model.calibrate(dataset.feature_matrix(z2))
        save_model(model, args.out)
        print(f"wrote optimum-path forest model to {args.out}")
        return 0

    gamma_values = args.gamma
    if gamma_values is None:
        gamma_values = (None,) if args.kernel == "linear" else (1.0 / X1.shape[1],)
    needs_search = len(args.C) > 1 or len(gamma_values) > 1
    if needs_search:
        if not args.split:
            raise ValidationError(
                "grid search needs --split to provide a validation partition"
            )
        X2 = dataset.feature_matrix(z2)
        y2 = dataset.labels(z2)
        result = grid_search(
            X1, y1, dataset.m, X2, y2,
            strategy=args.strategy, kernel=args.kernel,
            C_values=args.C, gamma_values=gamma_values,
        )
        model = result.model
        print(f"grid search chose C={result.C} gamma={result.gamma} "
              f"(validation kappa {result.kappa:.3f})")
    else:
        model = train_multiclass(
            X1, y1, dataset.m,
            strategy=args.strategy, kernel=args.kernel,
            C=args.C[0], gamma=gamma_values[0],
        )
    if args.delay > 0:
        model = StrongSvmClassifier(model, delay=args.delay)
    save_model(model, args.out)
    print(f"wrote {args.strategy} model to {args.out}")
    return 0


def _cmd_calibrate(args) -> int:
    dataset = load_dataset(args.data)
    split = load_split(args.split)
    model = load_model(args.model)
    X2 = dataset.feature_matrix(split.z2)
    y2 = dataset.labels(split.z2)
    if isinstance(model, OpfModel):
        assignments = classify_opf(model, X2, split.z2)
    elif hasattr(model, "classify"):
        assignments = model.classify(X2, split.z2)
    else:
        assignments = classify(model, X2, split.z2)
    hist = estimate_error_histograms(
        assignments, y2, args.bins, dataset.m, smoothing=args.smoothing
    )
    with open(args.out, "w") as fh:
        json.dump(hist.to_dict(), fh, indent=1)
        fh.write("\n")
    total_err = int(hist.errors.sum())
    print(f"calibrated {args.bins} bins on {len(split.z2)} samples "
          f"({total_err} errors); wrote {args.out}")
    return 0


def _cmd_route(args) -> int:
    dataset = load_dataset(args.data)
    _, _, z3 = _partition_ids(args, dataset)
    X3 = dataset.feature_matrix(z3)
    fast_model = load_model(args.fast_model)
    if isinstance(fast_model, StrongSvmClassifier):
        fast_model = fast_model.model

    if bool(args.slow_model) == bool(args.slow_command):
        raise ValidationError("route needs exactly one of --slow-model or "
                              "--slow-command")
    if args.slow_model:
        slow = load_model(args.slow_model)
        if not hasattr(slow, "classify"):
            slow = StrongSvmClassifier(slow, delay=0.0)
        close = lambda: None
    else:
        slow = ExternalStrongClassifier(
            shlex.split(args.slow_command), m=dataset.m
        )
        close = slow.close

    hist = None
    if args.hist:
        with open(args.hist) as fh:
            hist = ErrorHistogram.from_dict(json.load(fh))
    budget = args.budget
    if budget is None:
        budget = int(round(args.budget_fraction * len(z3)))

    try:
        result = route(
            z3, X3, X3, fast_model, slow, hist, budget, args.seed,
            method=args.method,
        )
    finally:
        close()

    doc = {
        "format": "cascadekit-outcomes",
        "version": 1,
        "m": dataset.m,
        "seed": args.seed,
        "method": args.method,
        "budget": budget,
        "fast_ms": result.fast_ms,
        "select_ms": result.select_ms,
        "slow_ms": result.slow_ms,
        "plan": result.plan.to_dict(),
        "outcomes": [
            {
                "id": o.sample_id,
                "fast_label": o.fast.label,
                "fast_confidence": o.fast.confidence,
                "routed": o.routed,
                "slow_label": o.slow.label if o.routed else None,
                "final_label": o.final_label,
                "elapsed_ms": o.elapsed_ms,
            }
            for o in result.outcomes
        ],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(f"routed {result.n_routed}/{len(z3)} samples; wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    with open(args.outcomes) as fh:
        doc = json.load(fh)
    if doc.get("format") != "cascadekit-outcomes":
        raise ValidationError(f"{args.outcomes} is not an outcomes document")
    dataset = load_dataset(args.data)
    m = doc["m"]
    ids = [o["id"] for o in doc["outcomes"]]
    truth = {s.id: s.label for s in dataset.samples}
    missing = [i for i in ids if i not in truth]
    if missing:
        raise ValidationError(
            f"outcome ids missing from dataset: {missing[:5]}"
        )
    y_true = [truth[i] for i in ids]
    y_final = [o["final_label"] for o in doc["outcomes"]]
    y_fast = [o["fast_label"] for o in doc["outcomes"]]

    cm = confusion_matrix(y_true, y_final, m)
    print(f"samples: {len(ids)}   routed: "
          f"{sum(1 for o in doc['outcomes'] if o['routed'])}")
    print(f"kappa: {cohen_kappa(cm):.4f}")
    print(f"accuracy: {overall_accuracy(cm):.4f}")
    fast_cm = confusion_matrix(y_true, y_fast, m)
    print(f"fast-only kappa: {cohen_kappa(fast_cm):.4f}")
    for k, acc in enumerate(per_class_accuracy(cm), start=1):
        shown = "undefined" if np.isnan(acc) else f"{acc:.4f}"
        print(f"  class {k} accuracy: {shown}")

    case1 = case2 = None
    routed = [o for o in doc["outcomes"] if o["routed"]]
    if routed:
        correct = [o for o in routed if o["fast_label"] == truth[o["id"]]]
        wrong = [o for o in routed if o["fast_label"] != truth[o["id"]]]
        if correct:
            case1 = 100.0 * sum(
                1 for o in correct if o["slow_label"] != truth[o["id"]]
            ) / len(correct)
        if wrong:
            case2 = 100.0 * sum(
                1 for o in wrong if o["slow_label"] == truth[o["id"]]
            ) / len(wrong)
    print(f"case1 (good decisions broken): "
          f"{'absent' if case1 is None else f'{case1:.2f}%'}")
    print(f"case2 (bad decisions fixed): "
          f"{'absent' if case2 is None else f'{case2:.2f}%'}")
    return 0


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def _cmd_sweep_bins(args) -> int:
    report = sweep_bins(_load_config(args.config), bin_values=args.bins)
    if args.out:
        report.to_json(args.out)
    sys.stdout.write(report.render_text())
    return 0


def _cmd_compare(args) -> int:
    report = run_experiment(_load_config(args.config))
    if args.out:
        report.to_json(args.out)
    sys.stdout.write(report.render_text())
    return 0


_DISPATCH = {
    ("dataset", "gen"): _cmd_dataset_gen,
    ("dataset", "inspect"): _cmd_dataset_inspect,
    ("dataset", "split"): _cmd_dataset_split,
    ("features", "extract"): _cmd_features_extract,
    ("train", None): _cmd_train,
    ("calibrate", None): _cmd_calibrate,
    ("route", None): _cmd_route,
    ("evaluate", None): _cmd_evaluate,
    ("sweep-bins", None): _cmd_sweep_bins,
    ("compare", None): _cmd_compare,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    subcommand = getattr(args, "dataset_command", None) or getattr(
        args, "features_command", None
    )
    handler = _DISPATCH[(args.command, subcommand)]
    try:
        return handler(args)
    except DataError as exc:
        print(f"cascadekit: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"cascadekit: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"cascadekit: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 1
        print(f"cascadekit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
