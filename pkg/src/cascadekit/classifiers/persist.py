"""Model persistence as versioned, self-describing JSON documents.

Floats are serialized through Python's repr, which round-trips IEEE
doubles exactly, so a reloaded model reproduces bit-identical decision
values and assignments.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ..errors import MissingInputError, ParseError, ValidationError
from .multiclass import MulticlassModel, PairModel
from .opf import OpfModel
from .strong import StrongSvmClassifier
from .svm import BinarySvmModel

__all__ = ["save_model", "load_model"]

_FORMAT = "cascadekit-model"
_VERSION = 1


def _svm_doc(svm: BinarySvmModel) -> dict:
    return {
        "kernel": svm.kernel,
        "gamma": svm.gamma,
        "C": svm.C,
        "sv": [[float(v) for v in row] for row in svm.sv_X],
        "coef": [float(v) for v in svm.sv_coef],
        "b": float(svm.b),
        "dual_value": float(svm.dual_value),
        "kkt_residual": float(svm.kkt_residual),
    }


def _svm_from_doc(doc: dict) -> BinarySvmModel:
    return BinarySvmModel(
        kernel=doc["kernel"],
        gamma=doc["gamma"],
        C=doc["C"],
        sv_X=np.asarray(doc["sv"], dtype=float).reshape(len(doc["coef"]), -1),
        sv_coef=np.asarray(doc["coef"], dtype=float),
        b=doc["b"],
        dual_value=doc.get("dual_value", 0.0),
        kkt_residual=doc.get("kkt_residual", 0.0),
    )


def save_model(model, path: str, extras: dict | None = None) -> None:
    """Write a multiclass model, a strong wrapper, or an OPF model."""
    delay = 0.0
    if isinstance(model, StrongSvmClassifier):
        delay = model.delay
        model = model.model

    doc: dict = {"format": _FORMAT, "version": _VERSION}
    if isinstance(model, MulticlassModel):
        doc.update(
            {
                "kind": "multiclass",
                "strategy": model.strategy,
                "m": model.m,
                "kernel": model.kernel,
                "C": model.C,
                "gamma": model.gamma,
                "delay": delay,
                "per_class": [_svm_doc(s) for s in model.per_class],
                "pairs": [
                    {
                        "class_i": p.class_i,
                        "class_j": p.class_j,
                        "svm": _svm_doc(p.svm),
                        "platt": None if p.platt is None else
                        [float(p.platt[0]), float(p.platt[1])],
                    }
                    for p in model.pairs
                ],
            }
        )
    elif isinstance(model, OpfModel):
        doc.update(
            {
                "kind": "opf",
                "X": [[float(v) for v in row] for row in model.X],
                "y": [int(v) for v in model.y],
                "cost": [float(v) for v in model.cost],
                "root_label": [int(v) for v in model.root_label],
                "prototypes": [bool(v) for v in model.prototypes],
                "scale": float(model.scale),
            }
        )
    else:
        raise ValidationError(f"cannot persist {type(model).__name__}")
    if extras:
        doc["extras"] = extras
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path: str):
    """Load whatever save_model wrote. Strong wrappers round-trip as
    StrongSvmClassifier when a nonzero delay was saved."""
    if not os.path.exists(path):
        raise MissingInputError(f"model file not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=exc.lineno) from None
    if doc.get("format") != _FORMAT:
        raise ValidationError("not a model document")
    if doc.get("version") != _VERSION:
        raise ValidationError(f"unsupported model version {doc.get('version')}")

    if doc["kind"] == "multiclass":
        model = MulticlassModel(
            strategy=doc["strategy"],
            m=doc["m"],
            kernel=doc["kernel"],
            C=doc["C"],
            gamma=doc["gamma"],
            per_class=[_svm_from_doc(d) for d in doc["per_class"]],
            pairs=[
                PairModel(
                    class_i=d["class_i"],
                    class_j=d["class_j"],
                    svm=_svm_from_doc(d["svm"]),
                    platt=None if d["platt"] is None else tuple(d["platt"]),
                )
                for d in doc["pairs"]
            ],
        )
        if doc.get("delay", 0.0):
            return StrongSvmClassifier(model=model, delay=doc["delay"])
        return model
    if doc["kind"] == "opf":
        return OpfModel(
            X=np.asarray(doc["X"], dtype=float),
            y=np.asarray(doc["y"], dtype=int),
            cost=np.asarray(doc["cost"], dtype=float),
            root_label=np.asarray(doc["root_label"], dtype=int),
            prototypes=np.asarray(doc["prototypes"], dtype=bool),
            scale=doc["scale"],
        )
    raise ValidationError(f"unknown model kind {doc['kind']!r}")
