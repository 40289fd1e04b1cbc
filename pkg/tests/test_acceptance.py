"""End-to-end guarantees of the toolkit, one test per property.

Run with -v to get one pass/fail line per guarantee. The reference
benchmark (imbalanced two-class Gaussian mixture, noisy fast view and
clean slow view, ten repetitions) is executed once and shared by the
tests that read it.
"""

import time

import numpy as np
import pytest

from cascadekit.classifiers.base import Assignment
from cascadekit.classifiers.coupling import pairwise_coupling
from cascadekit.classifiers.multiclass import classify, train_multiclass
from cascadekit.classifiers.opf import _distance_matrix, train_opf, classify_opf
from cascadekit.classifiers.strong import StrongSvmClassifier
from cascadekit.classifiers.svm import kernel_matrix, train_binary_svm
from cascadekit.datasets import SyntheticSpec, generate_synthetic, stratified_split
from cascadekit.experiment import ExperimentConfig, run_experiment, sweep_bins
from cascadekit.features.bic import bic_raw_histograms
from cascadekit.features.extract import Standardizer
from cascadekit.features.msps import msps_optimize
from cascadekit.features.texture import cooccurrence_features
from cascadekit.hybrid import estimate_error_histograms, route
from cascadekit.metrics import cohen_kappa, per_class_accuracy

from conftest import random_image_and_mask
from oracles import (
    coupling_pg_reference,
    kappa_reference,
    opf_costs_reference,
    per_class_reference,
    random_pairwise_matrices,
    svm_qp_reference,
)

REFERENCE_SPEC = SyntheticSpec(
    counts=(175, 473), dim=4, separation=2.2, ds1_noise=2.0, name="reference"
)


@pytest.fixture(scope="module")
def reference_run():
    """The shared ten-repetition benchmark plus its wall time."""
    config = ExperimentConfig(
        synthetic=REFERENCE_SPEC,
        techniques=("ds1", "ds2", "hybrid", "hybrid-rs"),
        repetitions=10,
        base_seed=20,
        fast_C=(0.1, 1.0, 10.0),
        fast_gamma=(0.125, 0.5, 2.0),
        slow_C=(1.0, 10.0, 100.0),
        slow_gamma=(0.125, 0.5, 2.0),
    )
    t0 = time.perf_counter()
    report = run_experiment(config)
    return report, time.perf_counter() - t0


def test_mean_kappa_ordering_on_reference_benchmark(reference_run):
    # DS1 < hybrid-RS < hybrid <= DS2, with the error-guided margin over
    # random routing at least 0.02 and the fast/slow gap at least 0.10
    report, elapsed = reference_run
    kappa = {t: report.aggregates[t]["kappa_mean"]
             for t in ("ds1", "ds2", "hybrid", "hybrid-rs")}
    assert kappa["ds1"] < kappa["hybrid-rs"] < kappa["hybrid"] <= kappa["ds2"]
    assert kappa["hybrid"] - kappa["hybrid-rs"] >= 0.02
    assert kappa["ds2"] - kappa["ds1"] >= 0.10
    assert elapsed < 300.0


def test_hybrid_timing_against_delayed_slow_stage():
    # with the slow stage delayed to 30x the fast stage's measured mean,
    # routing 10% must stay within 1.25x of the ideal budget split and
    # within a quarter of running the slow stage on everything
    dataset = generate_synthetic(REFERENCE_SPEC, seed=77)
    split = stratified_split(dataset, (0.4, 0.3, 0.3), seed=77)

    def matrices(view):
        X1 = dataset.feature_matrix(split.z1, view)
        X2 = dataset.feature_matrix(split.z2, view)
        X3 = dataset.feature_matrix(split.z3, view)
        scaler = Standardizer.fit(X1)
        return scaler.transform(X1), scaler.transform(X2), scaler.transform(X3)

    Xf1, Xf2, Xf3 = matrices("degraded")
    Xs1, _, Xs3 = matrices("clean")
    y1 = dataset.labels(split.z1)
    y2 = dataset.labels(split.z2)

    fast = train_multiclass(Xf1, y1, dataset.m, strategy="probabilistic",
                            kernel="rbf", C=10.0, gamma=0.5)
    slow_model = train_multiclass(Xs1, y1, dataset.m, strategy="probabilistic",
                                  kernel="rbf", C=10.0, gamma=0.5)

    def per_sample_ms(fn, n):
        runs = []
        for _ in range(3):
            t0 = time.perf_counter()
            fn()
            runs.append((time.perf_counter() - t0) * 1000.0 / n)
        return float(np.median(runs))

    n3 = len(split.z3)
    hist = estimate_error_histograms(
        classify(fast, Xf2, split.z2), y2, 10, dataset.m
    )
    classify(fast, Xf3, split.z3)  # warm-up

    # wall-clock assertions are retried: a transient load spike between
    # the calibration measurement and the routed run would otherwise
    # compare times taken under different machine conditions
    for attempt in range(3):
        ds1_ms = per_sample_ms(lambda: classify(fast, Xf3, split.z3), n3)
        slow = StrongSvmClassifier(slow_model, delay=30.0 * ds1_ms / 1000.0)
        ds2_ms = per_sample_ms(lambda: slow.classify(Xs3, split.z3), n3)

        result = route(split.z3, Xf3, Xs3, fast, slow, hist,
                       M=int(round(0.10 * n3)), seed=4)
        hybrid_ms = result.mean_ms_per_sample

        budget_bound = (ds1_ms + 0.10 * ds2_ms) * 1.25
        slow_alone_bound = 0.25 * ds2_ms
        if hybrid_ms <= budget_bound and hybrid_ms <= slow_alone_bound:
            break
        if attempt == 2:
            assert hybrid_ms <= budget_bound
            assert hybrid_ms <= slow_alone_bound


def test_pairwise_coupling_matches_oracle_on_thousand_matrices():
    rng = np.random.default_rng(2024)
    mats = random_pairwise_matrices(1000, rng)
    by_m: dict[int, list] = {}
    for r in mats:
        by_m.setdefault(r.shape[0], []).append(r)

    solve_time = 0.0
    for m, group in sorted(by_m.items()):
        ref = coupling_pg_reference(np.stack(group))
        t0 = time.perf_counter()
        solutions = [pairwise_coupling(r) for r in group]
        solve_time += time.perf_counter() - t0
        for p, p_ref in zip(solutions, ref):
            assert np.all(p >= 0.0)
            assert abs(p.sum() - 1.0) <= 1e-9
            assert np.max(np.abs(p - p_ref)) <= 1e-6
    assert solve_time < 10.0


def test_svm_dual_matches_exhaustive_qp_on_fifty_datasets():
    rng = np.random.default_rng(555)
    kernels = [("linear", None), ("rbf", 0.5), ("rbf", 2.0)]
    Cs = [0.5, 1.0, 10.0]
    for trial in range(50):
        n = int(rng.integers(4, 13))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d)) * rng.uniform(0.5, 2.0)
        y = np.ones(n)
        neg = rng.choice(n, size=int(rng.integers(1, n)), replace=False)
        y[neg] = -1.0
        if np.all(y == y[0]):
            y[0] = -y[0]
        kernel, gamma = kernels[trial % 3]
        C = Cs[trial % 3]

        K = kernel_matrix(X, X, kernel, gamma)
        ref_alpha, b_lo, b_hi, ref_value = svm_qp_reference(K, y, C)
        model = train_binary_svm(X, y, kernel=kernel, C=C, gamma=gamma,
                                 tol=1e-5)
        assert model.dual_value == pytest.approx(ref_value, abs=1e-4)

        # the bias is unique only with an interior support vector; then
        # the solver must hit it within a tolerance-scaled slack.  A wide
        # KKT interval means every bias in it is optimal and an equally
        # near-optimal alpha can shift the interval itself, so there the
        # solver's bias is shared with the oracle for the sign test
        if b_hi - b_lo <= 1e-7:
            ref_b = 0.5 * (b_lo + b_hi)
            assert abs(model.b - ref_b) <= 1e-3
        else:
            ref_b = model.b
        f_model = model.decision(X)
        f_ref = (ref_alpha * y) @ K + ref_b
        decisive = (np.abs(f_model) > 1e-4) & (np.abs(f_ref) > 1e-4)
        assert np.array_equal(
            np.sign(f_model[decisive]), np.sign(f_ref[decisive])
        )


def test_opf_costs_match_exhaustive_enumeration_on_fifty_datasets():
    rng = np.random.default_rng(909)
    for _ in range(50):
        n = int(rng.integers(3, 9))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = rng.integers(1, 3, size=n)
        if len(np.unique(y)) < 2:
            y[0] = 3 - y[0]
        model = train_opf(X, y)
        D = _distance_matrix(X, X)
        expected = opf_costs_reference(D, y, np.nonzero(model.prototypes)[0])
        assert np.array_equal(model.cost, expected)
        predicted = np.array([a.label for a in classify_opf(model, X)])
        assert np.array_equal(predicted, y)


def test_agreement_metrics_match_duplicate_oracle():
    rng = np.random.default_rng(321)
    for _ in range(100):
        m = int(rng.integers(2, 7))
        cm = rng.integers(0, 50, size=(m, m)).astype(np.int64)
        if cm.sum() == 0:
            cm[0, 0] = 1
        assert abs(cohen_kappa(cm) - kappa_reference(cm)) <= 1e-12
        ours = per_class_accuracy(cm)
        ref = per_class_reference(cm)
        for a, b in zip(ours, ref):
            if np.isnan(b):
                assert np.isnan(a)
            else:
                assert abs(a - b) <= 1e-12
    assert cohen_kappa(np.diag([7, 11, 3])) == 1.0
    assert cohen_kappa(np.array([[25, 25], [25, 25]])) == 0.0


def test_selector_properties():
    rng = np.random.default_rng(88)
    centers = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]])
    X1 = np.vstack([c + rng.normal(scale=0.9, size=(20, 2)) for c in centers])
    y1 = np.repeat([1, 2, 3], 20)
    X2 = np.vstack([c + rng.normal(scale=0.9, size=(15, 2)) for c in centers])
    y2 = np.repeat([1, 2, 3], 15)
    X3 = np.vstack([c + rng.normal(scale=0.9, size=(15, 2)) for c in centers])
    y3 = np.repeat([1, 2, 3], 15)
    ids = [f"t{i}" for i in range(len(X3))]
    N = len(ids)

    fast = train_multiclass(X1, y1, 3, strategy="probabilistic",
                            kernel="rbf", C=10.0, gamma=0.5)
    z2_assignments = classify(fast, X2)
    hist = estimate_error_histograms(z2_assignments, y2, 10, 3)

    # calibration conservation: cell error totals equal the number of
    # misclassified validation samples
    z2_errors = sum(1 for a, t in zip(z2_assignments, y2) if a.label != t)
    assert int(hist.errors.sum()) == z2_errors

    fast_labels = [a.label for a in classify(fast, X3, ids)]

    class _Oracle:
        def classify(self, X, ids=None):
            truth = dict(zip([f"t{i}" for i in range(N)], map(int, y3)))
            return [Assignment(sample_id=s, label=truth[s], confidence=1.0)
                    for s in ids]

    class _SameAsFast:
        def classify(self, X, ids=None):
            return classify(fast, X, ids)

    # budget zero: output identical to the fast stage alone
    r0 = route(ids, X3, X3, fast, _Oracle(), hist, M=0, seed=0)
    assert r0.final_labels().tolist() == fast_labels

    # perfect slow stage and full budget: everything comes back right
    r_full = route(ids, X3, X3, fast, _Oracle(), hist, M=N, seed=0)
    assert np.array_equal(r_full.final_labels(), y3)

    # slow stage identical to the fast stage: routing is a no-op on
    # labels at every budget
    for M in (0, 1, 7, N // 2, N):
        r_same = route(ids, X3, X3, fast, _SameAsFast(), hist, M=M, seed=3)
        assert r_same.final_labels().tolist() == fast_labels

    # the routed count is always min(M, N)
    for M in (0, 3, 11, N, N + 50):
        r = route(ids, X3, X3, fast, _Oracle(), hist, M=M, seed=5)
        assert r.n_routed == min(M, N)

    # a fixed seed reproduces the plan exactly
    p1 = route(ids, X3, X3, fast, _Oracle(), hist, M=9, seed=42).plan
    p2 = route(ids, X3, X3, fast, _Oracle(), hist, M=9, seed=42).plan
    assert p1.to_dict() == p2.to_dict()


def test_feature_invariants():
    rng = np.random.default_rng(4096)

    # color histogram mass: before log compression the border and
    # interior counts together cover the mask exactly
    for _ in range(100):
        image, mask = random_image_and_mask(rng)
        border, interior = bic_raw_histograms(image, mask)
        assert int(border.sum() + interior.sum()) == int(mask.sum())

    # a uniform image co-occurs only with itself
    flat = np.full((12, 12, 3), 200, dtype=np.uint8)
    energy, entropy, variance, homogeneity = cooccurrence_features(
        flat, np.ones((12, 12), dtype=bool)
    )
    assert energy == 1.0
    assert entropy == 0.0
    assert variance == 0.0
    assert homogeneity == 1.0

    # quarter-turn invariance of all four texture features
    for _ in range(100):
        image, mask = random_image_and_mask(rng, h=16, w=16)
        base = cooccurrence_features(image, mask)
        turned = cooccurrence_features(np.rot90(image), np.rot90(mask))
        assert np.max(np.abs(base - turned)) <= 1e-12

    # the greedy weight search only ever accepts strict improvements
    n = 60
    y = np.repeat([1, 2], n // 2)
    X = rng.normal(size=(n, 5))
    X[:, :2] += np.where(y == 1, -2.0, 2.0)[:, None]
    X[:, 2:] *= 6.0
    result = msps_optimize(X, y)
    for earlier, later in zip(result.history, result.history[1:]):
        assert later > earlier


def test_bin_sweep_emits_report_with_shared_splits(tmp_path):
    config = ExperimentConfig(
        synthetic=REFERENCE_SPEC,
        techniques=("hybrid",),
        repetitions=3,
        base_seed=20,
        fast_C=(1.0, 10.0),
        fast_gamma=(0.125, 0.5),
        slow_C=(10.0, 100.0),
        slow_gamma=(0.125, 0.5),
    )
    report = sweep_bins(config, bin_values=(10, 20, 30))

    assert {(c["rep"], c["bins"]) for c in report.cells} == {
        (rep, n) for rep in range(3) for n in (10, 20, 30)
    }
    by_rep: dict[int, set] = {}
    for cell in report.cells:
        by_rep.setdefault(cell["rep"], set()).add(cell["split_fingerprint"])
    for prints in by_rep.values():
        assert len(prints) == 1  # every bin count saw the same split

    out = tmp_path / "bin-sweep.json"
    report.to_json(str(out))
    assert out.exists() and out.stat().st_size > 0
    text = report.render_text()
    for n in (10, 20, 30):
        assert str(n) in text
    # deliberately no assertion about which bin count wins
