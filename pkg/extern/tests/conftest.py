"""Shared plumbing: a persisted model to serve and a raw wire client."""

import json
import subprocess
import sys

import pytest

from cascadekit import (
    SyntheticSpec,
    generate_synthetic,
    grid_search,
    save_model,
    stratified_split,
)


def server_command(model_path, *extra):
    return [sys.executable, "-m", "cascadekit_extern", "serve",
            str(model_path), *extra]


class RawClient:
    """Speaks the wire format directly, with no client-library help."""

    def __init__(self, command):
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def send_raw(self, line: str):
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def send(self, doc: dict):
        self.send_raw(json.dumps(doc))

    def recv(self, timeout: float = 20.0) -> dict | None:
        # line-buffered stdout; None means the server hung up
        line = self.proc.stdout.readline()
        return json.loads(line) if line else None

    def ask(self, doc: dict) -> dict | None:
        self.send(doc)
        return self.recv()

    def close(self) -> int:
        if self.proc.poll() is None:
            self.proc.stdin.close()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        return self.proc.returncode

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


@pytest.fixture(scope="session")
def trained_setup(tmp_path_factory):
    """A small two-class problem, a tuned probabilistic model, and the
    model persisted where a server can load it."""
    spec = SyntheticSpec(counts=(40, 80), dim=4, separation=2.5, ds1_noise=1.0)
    dataset = generate_synthetic(spec, seed=13)
    split = stratified_split(dataset, fractions=(0.4, 0.3, 0.3), seed=13)
    X1 = dataset.feature_matrix(split.z1, view="degraded")
    X2 = dataset.feature_matrix(split.z2, view="degraded")
    X3 = dataset.feature_matrix(split.z3, view="degraded")
    y1, y2 = dataset.labels(split.z1), dataset.labels(split.z2)
    model = grid_search(
        X1, y1, dataset.m, X2, y2,
        strategy="probabilistic", kernel="rbf",
        C_values=(1.0, 10.0), gamma_values=(0.25, 1.0),
    ).model
    path = tmp_path_factory.mktemp("models") / "fast.json"
    save_model(model, str(path))
    return {
        "dataset": dataset,
        "split": split,
        "model": model,
        "model_path": str(path),
        "X3": X3,
    }
