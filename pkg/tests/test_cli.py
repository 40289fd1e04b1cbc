"""Command-line workflows driven in-process through main()."""

import json
import os
import sys

import pytest

from cascadekit.cli import main


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _run(*argv):
    return main(list(argv))


def _gen(workdir, name="bench.tsv", noise=2.0):
    path = str(workdir / name)
    code = _run(
        "dataset", "gen", "--counts", "40,80", "--dim", "4",
        "--separation", "2.5", "--noise", str(noise), "--seed", "9",
        "--out", path,
    )
    assert code == 0
    return path


def test_full_workflow(workdir, capsys):
    data = _gen(workdir)

    split = str(workdir / "split.json")
    assert _run("dataset", "split", data, "--seed", "3", "--out", split) == 0

    fast = str(workdir / "fast.json")
    code = _run(
        "train", data, "--strategy", "probabilistic", "--kernel", "rbf",
        "--C", "1,10", "--gamma", "0.125,0.5", "--split", split,
        "--out", fast,
    )
    assert code == 0

    hist = str(workdir / "hist.json")
    assert _run("calibrate", fast, data, "--split", split,
                "--bins", "10", "--out", hist) == 0
    with open(hist) as fh:
        doc = json.load(fh)
    assert doc["format"] == "cascadekit-error-histogram"

    outcomes = str(workdir / "outcomes.json")
    code = _run(
        "route", data, "--fast-model", fast, "--slow-model", fast,
        "--hist", hist, "--split", split, "--budget", "6", "--seed", "1",
        "--out", outcomes,
    )
    assert code == 0
    with open(outcomes) as fh:
        doc = json.load(fh)
    assert doc["format"] == "cascadekit-outcomes"
    assert sum(1 for o in doc["outcomes"] if o["routed"]) == 6

    assert _run("evaluate", outcomes, data) == 0
    out = capsys.readouterr().out
    assert "kappa" in out


def test_dataset_inspect(workdir, capsys):
    data = _gen(workdir)
    assert _run("dataset", "inspect", data) == 0
    out = capsys.readouterr().out
    assert "120" in out


def test_route_budget_fraction(workdir):
    data = _gen(workdir)
    split = str(workdir / "s.json")
    _run("dataset", "split", data, "--seed", "3", "--out", split)
    fast = str(workdir / "f.json")
    _run("train", data, "--C", "1", "--gamma", "0.25", "--split", split,
         "--out", fast)
    hist = str(workdir / "h.json")
    _run("calibrate", fast, data, "--split", split, "--out", hist)
    outcomes = str(workdir / "o.json")
    code = _run(
        "route", data, "--fast-model", fast, "--slow-model", fast,
        "--hist", hist, "--split", split, "--budget-fraction", "0.10",
        "--out", outcomes,
    )
    assert code == 0
    with open(outcomes) as fh:
        doc = json.load(fh)
    # z3 holds 36 of 120 samples; 10% rounds to 4
    assert doc["budget"] == 4


def test_compare_and_sweep_with_config(workdir, capsys):
    config = {
        "synthetic": {
            "counts": [30, 60], "dim": 4,
            "separation": 2.5, "ds1_noise": 2.0,
        },
        "techniques": ["ds1", "ds2", "hybrid"],
        "repetitions": 1,
        "base_seed": 3,
        "fast_C": [1.0], "fast_gamma": [0.25],
        "slow_C": [1.0], "slow_gamma": [0.25],
    }
    cfg = workdir / "config.json"
    cfg.write_text(json.dumps(config))

    report_path = str(workdir / "report.json")
    assert _run("compare", "--config", str(cfg), "--out", report_path) == 0
    with open(report_path) as fh:
        doc = json.load(fh)
    # the config is echoed into the report
    assert doc["config"]["base_seed"] == 3
    assert doc["config"]["techniques"] == ["ds1", "ds2", "hybrid"]
    out = capsys.readouterr().out
    assert "hybrid" in out

    sweep_path = str(workdir / "sweep.json")
    assert _run("sweep-bins", "--config", str(cfg), "--bins", "5,10",
                "--out", sweep_path) == 0
    with open(sweep_path) as fh:
        doc = json.load(fh)
    assert doc["bin_values"] == [5, 10]
    assert doc["config"]["base_seed"] == 3


def test_usage_error_exits_1(workdir):
    with pytest.raises(SystemExit) as excinfo:
        _run("dataset", "gen", "--counts", "10,10")  # --out missing
    assert excinfo.value.code == 1


def test_missing_file_exits_2(workdir):
    assert _run("dataset", "inspect", str(workdir / "absent.tsv")) == 2


def test_grid_without_split_exits_2(workdir):
    data = _gen(workdir)
    code = _run("train", data, "--C", "1,10", "--gamma", "0.25",
                "--out", str(workdir / "m.json"))
    assert code == 2


def test_corrupt_config_exits_1(workdir):
    bad = workdir / "bad.json"
    bad.write_text("{")
    assert _run("compare", "--config", str(bad)) == 1


def test_opf_training_and_calibration(workdir):
    data = _gen(workdir)
    split = str(workdir / "s.json")
    _run("dataset", "split", data, "--seed", "3", "--out", split)
    model = str(workdir / "opf.json")
    assert _run("train", data, "--strategy", "opf", "--split", split,
                "--out", model) == 0
    with open(model) as fh:
        assert json.load(fh)["kind"] == "opf"
    hist = str(workdir / "opf-hist.json")
    assert _run("calibrate", model, data, "--split", split,
                "--out", hist) == 0


def test_delayed_model_round_trips_through_route(workdir):
    data = _gen(workdir)
    split = str(workdir / "s.json")
    _run("dataset", "split", data, "--seed", "3", "--out", split)
    fast = str(workdir / "f.json")
    _run("train", data, "--C", "1", "--gamma", "0.25", "--split", split,
         "--out", fast)
    slow = str(workdir / "slow.json")
    assert _run("train", data, "--C", "1", "--gamma", "0.25",
                "--split", split, "--delay", "0.001", "--out", slow) == 0
    hist = str(workdir / "h.json")
    _run("calibrate", fast, data, "--split", split, "--out", hist)
    outcomes = str(workdir / "o.json")
    assert _run("route", data, "--fast-model", fast, "--slow-model", slow,
                "--hist", hist, "--split", split, "--budget", "3",
                "--out", outcomes) == 0


def test_route_with_external_slow_command(workdir):
    # --slow-command is a shell-style string; it must be tokenized, not
    # iterated character by character
    data = _gen(workdir)
    split = str(workdir / "s.json")
    _run("dataset", "split", data, "--seed", "3", "--out", split)
    fast = str(workdir / "f.json")
    _run("train", data, "--C", "1", "--gamma", "0.25", "--split", split,
         "--out", fast)
    hist = str(workdir / "h.json")
    _run("calibrate", fast, data, "--split", split, "--out", hist)

    server = workdir / "server.py"
    server.write_text(
        "import json, sys\n"
        "for line in sys.stdin:\n"
        "    req = json.loads(line)\n"
        "    if req['op'] == 'hello':\n"
        "        print(json.dumps({'op': 'hello', 'ok': True}), flush=True)\n"
        "        continue\n"
        "    print(json.dumps({'op': 'predict', 'id': req['id'],\n"
        "                      'class': 1, 'confidence': 0.75}), flush=True)\n"
    )
    outcomes = str(workdir / "o.json")
    code = _run(
        "route", data, "--fast-model", fast,
        "--slow-command", f"{sys.executable} {server}",
        "--hist", hist, "--split", split, "--budget", "4",
        "--out", outcomes,
    )
    assert code == 0
    with open(outcomes) as fh:
        doc = json.load(fh)
    routed = [o for o in doc["outcomes"] if o["routed"]]
    assert len(routed) == 4
    assert all(o["final_label"] == 1 for o in routed)
