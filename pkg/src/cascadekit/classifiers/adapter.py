"""Client for an out-of-process slow stage.

The external classifier is any program that speaks line-delimited JSON
on stdin/stdout: one request line in, one response line out, in order.

    -> {"op": "hello", "m": 9}
    <- {"op": "hello", "ok": true}
    -> {"op": "predict", "id": "s1", "features": [..]}
    <- {"op": "predict", "id": "s1", "class": 3, "confidence": 0.91,
        "probs": [..]}

Image-backed samples may send {"image": path, "mask": path} instead of
"features". A response with "op": "error" or any transport failure
(crash, EOF, per-request timeout) raises AdapterError; the router turns
that into an aborted routed subset while unrouted samples keep their
fast-stage labels.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading

import numpy as np

from ..errors import AdapterError
from .base import Assignment

__all__ = ["ExternalStrongClassifier"]

_EOF = object()


class ExternalStrongClassifier:
    """Spawns the external program and proxies classify() calls to it."""

    def __init__(self, command, m: int, timeout: float = 30.0):
        self.command = list(command)
        self.m = m
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"could not start {self.command[0]!r}: {exc}") from None
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._handshake()

    def _pump(self):
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(_EOF)

    def _send(self, message: dict):
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError(f"external classifier is gone: {exc}") from None

    def _receive(self, context: str) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AdapterError(
                f"timeout after {self.timeout}s waiting for {context}"
            ) from None
        if line is _EOF:
            code = self._proc.poll()
            raise AdapterError(
                f"external classifier exited (code {code}) during {context}"
            )
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"unparseable response during {context}: {exc}") from None

    def _handshake(self):
        self._send({"op": "hello", "m": self.m})
        reply = self._receive("handshake")
        if reply.get("op") != "hello" or reply.get("ok") is not True:
            raise AdapterError(f"handshake rejected: {reply}")

    def _predict(self, request: dict) -> Assignment:
        self._send(request)
        reply = self._receive(f"predict {request['id']!r}")
        if reply.get("op") == "error":
            raise AdapterError(
                f"external classifier error for {request['id']!r}: "
                f"{reply.get('error')}"
            )
        if reply.get("op") != "predict" or reply.get("id") != request["id"]:
            raise AdapterError(f"out-of-order or invalid response: {reply}")
        label = int(reply["class"])
        if not 1 <= label <= self.m:
            raise AdapterError(f"class {label} outside 1..{self.m}")
        probs = reply.get("probs")
        return Assignment(
            sample_id=str(request["id"]),
            label=label,
            confidence=float(reply["confidence"]),
            probs=None if probs is None else np.asarray(probs, dtype=float),
        )

    def classify(self, X, ids=None) -> list[Assignment]:
        """Send one predict request per row, synchronously, in order."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(X) == 0:
            return []
        if ids is None:
            ids = [str(i) for i in range(len(X))]
        return [
            self._predict(
                {"op": "predict", "id": sid, "features": [float(v) for v in row]}
            )
            for sid, row in zip(ids, X)
        ]

    def classify_samples(self, samples) -> list[Assignment]:
        """Like classify(), for samples that reference images on disk."""
        out = []
        for s in samples:
            if s.features is not None:
                request = {
                    "op": "predict",
                    "id": s.id,
                    "features": [float(v) for v in s.features],
                }
            else:
                request = {
                    "op": "predict",
                    "id": s.id,
                    "image": s.image_path,
                    "mask": s.mask_path,
                }
            out.append(self._predict(request))
        return out

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
