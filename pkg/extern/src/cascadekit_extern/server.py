"""The serving loop: one JSON request per line in, one response out.

Protocol (field names are load-bearing, clients match them exactly):

    -> {"op": "hello", "m": 2}
    <- {"op": "hello", "ok": true}
    -> {"op": "predict", "id": "s0", "features": [..]}
    -> {"op": "predict", "id": "s1", "image": "a.png", "mask": "a_m.png"}
    <- {"op": "predict", "id": ..., "class": k, "confidence": c,
        "probs": [..]}

Responses are written in request order and flushed one per line. A
request the server cannot honor produces {"op": "error", "id": ...,
"error": ...} with the request's id (null when the line never parsed)
and the loop keeps serving. End of input ends the process cleanly.

Floats cross the wire through JSON via repr, which round-trips IEEE
doubles exactly, so a served prediction is bit-identical to calling
the wrapped model in process.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from cascadekit import (
    OpfModel,
    Sample,
    Standardizer,
    classify,
    classify_opf,
    extract_features,
    load_model,
)

__all__ = ["ServingModel", "load_serving_model", "handle_line", "serve"]


@dataclass
class ServingModel:
    """A loaded model plus the optional feature plumbing image requests
    need: standardization statistics and per-dimension weights, read
    from the model document's extras block when present."""

    model: object
    standardizer: Standardizer | None = None
    weights: np.ndarray | None = None

    @property
    def m(self) -> int:
        m = getattr(self.model, "m", None)
        if m is not None:
            return int(m)
        # the forest classifier stores labels, not a class count
        return int(np.max(self.model.y))

    def classify_one(self, features, sample_id: str):
        X = np.asarray([features], dtype=float)
        model = self.model
        if isinstance(model, OpfModel):
            return classify_opf(model, X, [sample_id])[0]
        if hasattr(model, "classify"):
            return model.classify(X, [sample_id])[0]
        return classify(model, X, [sample_id])[0]

    def image_features(self, image_path: str, mask_path: str) -> np.ndarray:
        sample = Sample(
            id="request", label=0, image_path=image_path, mask_path=mask_path
        )
        return extract_features(
            sample, weights=self.weights, standardizer=self.standardizer
        )


def load_serving_model(path: str) -> ServingModel:
    model = load_model(path)
    with open(path) as fh:
        extras = json.load(fh).get("extras") or {}
    standardizer = None
    if "standardizer" in extras:
        standardizer = Standardizer(
            mean=np.asarray(extras["standardizer"]["mean"], dtype=float),
            std=np.asarray(extras["standardizer"]["std"], dtype=float),
        )
    weights = None
    if "weights" in extras:
        weights = np.asarray(extras["weights"], dtype=float)
    return ServingModel(model=model, standardizer=standardizer, weights=weights)


def _error(request_id, message: str) -> dict:
    return {"op": "error", "id": request_id, "error": message}


def handle_line(serving: ServingModel, line: str) -> dict:
    """Turn one request line into one response document."""
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return _error(None, f"unparseable request: {exc}")
    if not isinstance(request, dict):
        return _error(None, "request must be a JSON object")

    op = request.get("op")
    request_id = request.get("id")
    if op == "hello":
        m = request.get("m")
        if m is not None and int(m) != serving.m:
            return _error(
                request_id, f"model serves {serving.m} classes, not {m}"
            )
        return {"op": "hello", "ok": True}
    if op != "predict":
        return _error(request_id, f"unknown op {op!r}")
    if request_id is None:
        return _error(None, "predict request without an id")

    try:
        if "features" in request:
            features = np.asarray(request["features"], dtype=float)
        elif "image" in request and "mask" in request:
            features = serving.image_features(request["image"], request["mask"])
        else:
            return _error(request_id, "need either features or image+mask")
        assignment = serving.classify_one(features, str(request_id))
    except Exception as exc:
        return _error(request_id, f"{type(exc).__name__}: {exc}")

    response = {
        "op": "predict",
        "id": request_id,
        "class": int(assignment.label),
        "confidence": float(assignment.confidence),
    }
    if assignment.probs is not None:
        response["probs"] = [float(v) for v in assignment.probs]
    return response


def serve(model_path: str, stream_in=None, stream_out=None,
          die_after: int | None = None) -> int:
    """Serve the persisted model until end of input.

    die_after is fault injection for integration tests: after that many
    predict responses the process dies without answering, the way a
    crashed backend would. Leave it unset in real use.
    """
    stream_in = sys.stdin if stream_in is None else stream_in
    stream_out = sys.stdout if stream_out is None else stream_out
    serving = load_serving_model(model_path)

    answered = 0
    for line in stream_in:
        if not line.strip():
            continue
        response = handle_line(serving, line)
        if (
            die_after is not None
            and response.get("op") == "predict"
            and answered >= die_after
        ):
            os._exit(70)
        stream_out.write(json.dumps(response) + "\n")
        stream_out.flush()
        if response.get("op") == "predict":
            answered += 1
    return 0
