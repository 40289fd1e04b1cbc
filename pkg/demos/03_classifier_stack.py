"""
The classifier stack
====================

One binary SVM per class pair, each calibrated to output a pairwise
probability; coupling fuses the pairs into one multiclass distribution
whose peak is the label and whose height is the confidence. A
graph-based forest classifier is trained alongside for comparison, and
a trained model survives a save/load round trip bit for bit.
"""

import tempfile

import numpy as np

from cascadekit import (
    SyntheticSpec,
    classify,
    classify_opf,
    generate_synthetic,
    grid_search,
    load_model,
    save_model,
    stratified_split,
    train_opf,
)

spec = SyntheticSpec(counts=(80, 80, 80), dim=4, separation=2.5, ds1_noise=1.5)
dataset = generate_synthetic(spec, seed=11)
split = stratified_split(dataset, fractions=(0.4, 0.3, 0.3), seed=11)

X1 = dataset.feature_matrix(split.z1, view="degraded")
y1 = dataset.labels(split.z1)
X2 = dataset.feature_matrix(split.z2, view="degraded")
y2 = dataset.labels(split.z2)
X3 = dataset.feature_matrix(split.z3, view="degraded")
y3 = dataset.labels(split.z3)

# hyperparameters are picked on the held-out calibration partition
result = grid_search(
    X1, y1, dataset.m, X2, y2,
    strategy="probabilistic", kernel="rbf",
    C_values=(1.0, 10.0), gamma_values=(0.25, 1.0),
)
print(f"grid search picked C={result.C} gamma={result.gamma}")

assignments = classify(result.model, X3, split.z3)
accuracy = np.mean([a.label == t for a, t in zip(assignments, y3)])
print(f"test accuracy {accuracy:.3f}")

a = assignments[0]
print(f"sample {a.sample_id}: label {a.label}, confidence {a.confidence:.3f}, "
      f"probs sum {a.probs.sum():.6f}")

# mistakes tend to come with lower confidence, the premise the routing
# stage depends on
correct = [a.confidence for a, t in zip(assignments, y3) if a.label == t]
wrong = [a.confidence for a, t in zip(assignments, y3) if a.label != t]
print(f"mean confidence: correct {np.mean(correct):.3f}, wrong {np.mean(wrong):.3f}")

# the forest classifier: prototypes on class borders, path costs out
opf = train_opf(X1, y1).calibrate(X2)
opf_assignments = classify_opf(opf, X3, split.z3)
opf_accuracy = np.mean([a.label == t for a, t in zip(opf_assignments, y3)])
print(f"forest classifier accuracy {opf_accuracy:.3f} "
      f"({int(opf.prototypes.sum())} prototypes)")

# persistence reproduces assignments exactly, not just approximately
with tempfile.NamedTemporaryFile(suffix=".json") as fh:
    save_model(result.model, fh.name)
    reloaded = load_model(fh.name)
restored = classify(reloaded, X3, split.z3)
assert all(
    a.label == b.label and a.confidence == b.confidence
    for a, b in zip(assignments, restored)
)
print("save/load round trip is exact")
