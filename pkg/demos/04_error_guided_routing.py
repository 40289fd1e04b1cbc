"""
Error-guided routing
====================

The fast stage labels everything. A histogram built on the calibration
partition says how often each (predicted class, confidence bin) cell
was wrong, and a fixed budget of suspicious samples is forwarded to the
slow stage, whose verdict is final. The point: most of the slow model's
accuracy at a small fraction of its cost.
"""

import numpy as np

from cascadekit import (
    SyntheticSpec,
    classify,
    cohen_kappa,
    confusion_matrix,
    estimate_error_histograms,
    generate_synthetic,
    grid_search,
    route,
    stratified_split,
    strong_train,
)
from cascadekit.experiment import case_analysis

spec = SyntheticSpec(counts=(90, 210), dim=4, separation=2.2, ds1_noise=2.0)
dataset = generate_synthetic(spec, seed=20)
split = stratified_split(dataset, fractions=(0.25, 0.25, 0.5), seed=20)

# fast stage trains on the degraded view, slow stage on the clean one
Xf1, Xs1 = (dataset.feature_matrix(split.z1, view=v) for v in ("degraded", "clean"))
Xf2, Xs2 = (dataset.feature_matrix(split.z2, view=v) for v in ("degraded", "clean"))
Xf3, Xs3 = (dataset.feature_matrix(split.z3, view=v) for v in ("degraded", "clean"))
y1, y2, y3 = (dataset.labels(p) for p in (split.z1, split.z2, split.z3))

fast = grid_search(
    Xf1, y1, dataset.m, Xf2, y2,
    strategy="probabilistic", kernel="rbf",
    C_values=(0.1, 1.0, 10.0), gamma_values=(0.125, 0.5, 2.0),
).model
slow = strong_train(Xs1, y1, dataset.m, Xs2, y2)

# where does the fast stage go wrong? ask the calibration partition
z2_assignments = classify(fast, Xf2, split.z2)
hist = estimate_error_histograms(z2_assignments, y2, n=10, m=dataset.m)
print("error probability by (class, bin), calibration partition:")
for j in range(dataset.m):
    row = " ".join(
        f"{hist.p_error[j, i]:.2f}" if hist.counts[j, i] else " .  "
        for i in range(hist.n)
    )
    print(f"  class {j + 1}: {row}")

# route 10% of the evaluation partition
budget = int(round(0.10 * len(split.z3)))
result = route(split.z3, Xf3, Xs3, fast, slow, hist, budget, seed=1)
print(f"\nbudget {budget} of {len(split.z3)}; routed {result.n_routed}")
for entry in result.plan.entries:
    print(f"  cell (class {entry.class_label}, bin {entry.bin:2d}) "
          f"p_error {entry.p_error:.2f}: {len(entry.ids)} sample(s), "
          f"{entry.pass_name} pass")

def kappa(labels):
    return cohen_kappa(confusion_matrix(y3, labels, dataset.m))

fast_labels = [o.fast.label for o in result.outcomes]
hybrid_kappa = kappa(result.final_labels())
slow_labels = [a.label for a in slow.classify(Xs3, split.z3)]
print(f"\nkappa: fast {kappa(fast_labels):.3f} "
      f"-> hybrid {hybrid_kappa:.3f} -> slow {kappa(slow_labels):.3f}")

# among routed samples: how often did the slow stage break a correct
# fast label (case 1), and how often did it fix a wrong one (case 2)?
truth = dict(zip(split.z3, y3))
case1, case2 = case_analysis(result.outcomes, truth)
print(f"routed samples: broke {case1:.1f}% of correct labels, "
      f"fixed {case2:.1f}% of wrong ones")
