import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bohrlaw import __version__
from bohrlaw.cli import main

SIN = {"base": ["1"], "dims": 1, "terms": [{"coords": [[-1, 1]], "re": 0.0, "im": 0.5},
                                           {"coords": [[1, 1]], "re": 0.0, "im": -0.5}]}
X2 = {"base": ["1"], "dims": 2, "terms": [{"coords": [[0, 1], [-1, 1]], "re": 0.0, "im": 0.5},
                                          {"coords": [[0, 1], [1, 1]], "re": 0.0, "im": -0.5}]}
SQRT2 = {"base": ["1", "sqrt2"], "dims": 1,
         "terms": [{"coords": [[0, 1], [s, 1]], "re": 0.5, "im": 0.0} for s in (-1, 1)]}
MIXED = {"dims": 2, "breakpoints": [[-10, 1], [10, 1]],
         "pieces": [[[[0, 1], [0, 1], [1, 2]], [[0, 1], [1, 1]]]]}
LINEAR = {"dims": 1, "breakpoints": [[-10, 1], [10, 1]], "pieces": [[[[0, 1], [1, 1]]]]}


class Workspace(type(Path())):
    """A temporary directory that can also drop JSON files into itself."""

    def put(self, name, obj):
        path = self / name
        path.write_text(json.dumps(obj))
        return str(path)


@pytest.fixture
def ws(tmp_path):
    w = Workspace(tmp_path)
    for name, obj in (("sin.json", SIN), ("x2.json", X2), ("sqrt2.json", SQRT2), ("mixed.json", MIXED),
                      ("linear.json", LINEAR), ("z2.json", {"dims": 2, "generators": "standard"})):
        w.put(name, obj)
    return w


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "bohrlaw", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout


def test_spectrum(ws, capsys):
    code, out, _ = run(capsys, "spectrum", ws / "sqrt2.json")
    assert code == 0
    d = json.loads(out)
    assert len(d["spectrum"]) == 2
    assert d["group"]["generators"] == [[[0, 1], [1, 1]]]


def test_nd_check_exit_codes(ws, capsys):
    code, out, _ = run(capsys, "nd-check", "burgers", "--data", ws / "sin.json")
    assert code == 0 and json.loads(out)["verdict"] == "holds"
    code, out, _ = run(capsys, "nd-check", ws / "mixed.json", "--group", ws / "z2.json")
    assert code == 2
    assert json.loads(out)["witness"]["xi"] == [[0, 1], [1, 1]]


def test_malformed_input_is_exit_one(ws, capsys):
    bad = ws.put("bad.json", {"dims": 1, "breakpoints": [[-1, 1], [0, 1], [1, 1]],
                              "pieces": [[[[0, 1], [1, 1]]], [[[1, 1], [1, 1]]]]})
    code, _, err = run(capsys, "nd-check", bad, "--data", ws / "sin.json")
    assert code == 1 and err.startswith("error [")
    code, _, err = run(capsys, "spectrum", ws / "missing.json")
    assert code == 1 and "error" in err
    code, _, err = run(capsys, "nd-check", "burgers", "--group", ws / "z2.json")
    assert code == 1


def test_fejer_flags_lines_outside_range(ws, capsys):
    third = ws.put("third.json", {"base": ["1"], "dims": 1, "terms": [
        {"coords": [[1, 1]], "re": 1.0, "im": 0.0}, {"coords": [[1, 3]], "re": 1.0, "im": 0.0}]})
    basis = ws.put("basis.json", [[[1, 1]]])
    code, out, _ = run(capsys, "fejer", third, "-r", 1, "--basis", basis)
    assert code == 0
    rows = {tuple(map(tuple, r["frequency"])): r for r in json.loads(out)["lines"]}
    assert rows[((1, 1),)]["weight"] == [1, 2]
    assert rows[((1, 3),)]["status"] == "outside index range"
    code, _, err = run(capsys, "fejer", third, "-r", 9)
    assert code == 1


def test_counterexample(ws, capsys):
    code, out, _ = run(capsys, "counterexample", ws / "mixed.json", "--group", ws / "z2.json", "--times", 1, 2)
    assert code == 0
    d = json.loads(out)
    Ds = [row["D"] for row in d["exact"]]
    assert max(Ds) - min(Ds) <= 1e-10
    code, out, _ = run(capsys, "counterexample", "burgers", "--data", ws / "sin.json")
    assert code == 2 and json.loads(out)["counterexample"] is None


def test_solve_zero_time_writes_one_snapshot(ws, capsys):
    cfg = ws.put("cfg0.json", {"flux": "burgers", "data": "sin.json", "grid": 64, "T": 0})
    code, out, _ = run(capsys, "solve", "--config", cfg, "--out", ws / "o0")
    assert code == 0
    snaps = sorted((ws / "o0" / "snapshots").iterdir())
    assert [p.name for p in snaps] == ["snap_0000.csv"]
    rows = (ws / "o0" / "decay.csv").read_text().splitlines()
    assert len(rows) == 2
    D0 = float(rows[1].split(",")[1])
    assert D0 == pytest.approx(2 / np.pi, abs=1e-3)
    lines = snaps[0].read_text().splitlines()
    assert lines[0].startswith("# grid=64 t=0 ")
    assert lines[1] == "i0,value"
    assert len(lines) == 66


def test_solve_reruns_are_bit_identical(ws, capsys):
    cfg = ws.put("cfg.json", {"flux": "burgers", "data": "sin.json", "grid": 128, "T": 0.5,
                              "snapshots": [0.25], "snapshot_format": "bin"})
    for d in ("a", "b"):
        assert run(capsys, "solve", "--config", cfg, "--out", ws / d)[0] == 0
    ma = json.loads((ws / "a" / "manifest.json").read_text())
    mb = json.loads((ws / "b" / "manifest.json").read_text())
    assert ma == mb
    assert set(ma["files"]) == {"decay.csv", "plot_decay.gp", "snapshots/snap_0000.bin",
                                "snapshots/snap_0001.bin", "snapshots/snap_0002.bin"}
    for name in ma["files"]:
        assert (ws / "a" / name).read_bytes() == (ws / "b" / name).read_bytes()
    assert ma["version"].startswith(__version__)
    raw = (ws / "a" / "snapshots" / "snap_0002.bin").read_bytes()
    head, data = raw.split(b"\n", 1)
    assert json.loads(head)["t"] == 0.5
    assert np.frombuffer(data, dtype="<f8").shape == (128,)
    assert "decay.csv" in (ws / "a" / "plot_decay.gp").read_text()


def test_threads_do_not_change_results(ws, capsys):
    cfg = ws.put("cfg.json", {"flux": "burgers", "data": "sin.json", "grid": 128, "T": 0.3})
    run(capsys, "solve", "--config", cfg, "--out", ws / "t1", "--threads", 1)
    run(capsys, "solve", "--config", cfg, "--out", ws / "t8", "--threads", 8)
    assert (ws / "t1" / "decay.csv").read_bytes() == (ws / "t8" / "decay.csv").read_bytes()


def test_decay_command_verdicts(ws, capsys):
    cfg = ws.put("cfgd.json", {"flux": "burgers", "data": "sin.json", "grid": 256, "T": 10,
                               "snapshots": [1, 5]})
    code, out, _ = run(capsys, "decay", "--config", cfg, "--out", ws / "d1")
    assert code == 0 and out.strip() == "decay-confirmed"
    v = json.loads((ws / "d1" / "verdict.json").read_text())
    assert v["ratios"][-1]["ratio"] < 0.1
    cfg = ws.put("cfgce.json", {"flux": "mixed.json", "data": "x2.json", "group": "z2.json", "grid": 64,
                                "T": 1, "decay": {"refinement": [64, 128]}})
    code, out, _ = run(capsys, "decay", "--config", cfg, "--out", ws / "d2")
    assert code == 0 and out.strip() == "no-decay-confirmed"
    cfg = ws.put("cfgstrict.json", {"flux": "burgers", "data": "sin.json", "grid": 64, "T": 0.2,
                                    "decay": {"threshold": 0.001}})
    code, out, _ = run(capsys, "decay", "--config", cfg, "--out", ws / "d3")
    assert code == 2 and out.strip() == "decay-not-confirmed"


def test_config_validation(ws, capsys):
    for bad in ({"flux": "burgers", "data": "sin.json", "grid": 100, "T": 1},
                {"flux": "burgers", "data": "sin.json", "grid": 64, "T": -1},
                {"flux": "burgers", "data": "sin.json", "grid": 64, "T": 1, "cfl": 0.9},
                {"flux": "burgers", "grid": 64, "T": 1}):
        cfg = ws.put("badcfg.json", bad)
        code, _, err = run(capsys, "solve", "--config", cfg, "--out", ws / "x")
        assert code == 1 and err.startswith("error [")


def test_out_dir_from_environment(ws, capsys, monkeypatch):
    cfg = ws.put("cfg0.json", {"flux": "burgers", "data": "sin.json", "grid": 16, "T": 0})
    monkeypatch.setenv("BOHRLAW_OUT", str(ws / "envout"))
    assert run(capsys, "solve", "--config", cfg)[0] == 0
    assert (ws / "envout" / "manifest.json").exists()


def test_bad_global_flags(ws, capsys):
    assert run(capsys, "--threads", 0, "spectrum", ws / "sin.json")[0] == 1
    assert run(capsys, "--seed", -1, "spectrum", ws / "sin.json")[0] == 1
