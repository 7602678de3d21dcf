from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from kreisslab.cli import dumps, run
from kreisslab.constructions import ShiftFamilySpec, TruncationSpec, build_truncated_shift
from kreisslab.linalg import load_matrix, save_matrix


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_round_trip(tmp_path, capsys):
    path = tmp_path / "m.json"
    code, out, _ = _run(capsys, ["construct", "--spec", "cesaro:m=1,c=0.1,N=8", "--out", str(path)])
    assert code == 0
    X = load_matrix(path)
    assert np.array_equal(X, build_truncated_shift(ShiftFamilySpec("cesaro", 1, 0.1), TruncationSpec(8)))
    save_matrix(tmp_path / "again.json", X)
    assert (tmp_path / "again.json").read_text() == path.read_text()
    rep = json.loads(out)
    assert rep["results"]["rows"] == 16 and rep["provenance"]["seed"] == 0


def test_constants_from_matrix(tmp_path, capsys):
    path = tmp_path / "a.json"
    save_matrix(path, np.array([[0.0, 8.0], [0.0, 0.0]]))
    code, out, _ = _run(capsys, ["constants", "--matrix", str(path), "--kind", "kreiss"])
    assert code == 0
    rep = json.loads(out)
    assert rep["command"] == "constants" and rep["results"]["kind"] == "kreiss"
    assert rep["results"]["lower"] > 1


def test_bounds_table_csv(tmp_path, capsys):
    csv_path = tmp_path / "t.csv"
    code, out, _ = _run(capsys, ["bounds-table", "--m", "1", "--eps", "1", "--N", "64,256",
                                 "--csv", str(csv_path)])
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "N,eps,m,bound,corner,power,valid,chain_ok"
    assert len(lines) == 3 and all(line.endswith(",true") for line in lines[1:])
    assert all(c["ok"] for c in json.loads(out)["claims"])


def test_report_is_deterministic(tmp_path, capsys):
    argv = ["kreiss-scan", "--spec", "cesaro:m=1,c=0.2", "--N", "8,16", "--grid", "32", "--seed", "3"]
    a = [_run(capsys, argv + ["--out", str(tmp_path / f"r{i}.json")])[0] for i in range(2)]
    assert a == [0, 0]
    assert (tmp_path / "r0.json").read_bytes() == (tmp_path / "r1.json").read_bytes()
    assert (tmp_path / "r0.json.timing.json").exists()


def test_thread_count_does_not_change_report(tmp_path, capsys, monkeypatch):
    argv = ["bounds-table", "--m", "1,2", "--eps", "0.5,1", "--N", "64"]
    _, one, _ = _run(capsys, argv + ["--threads", "1"])
    _, four, _ = _run(capsys, argv + ["--threads", "4"])
    monkeypatch.setenv("KREISSLAB_THREADS", "3")
    _, env, _ = _run(capsys, argv)
    assert one == four == env


def test_claim_failure_exit_code(capsys):
    code, out, _ = _run(capsys, ["power-growth", "--spec", "strong_kreiss:m=1,c=1", "--N", "16,1024"])
    assert code == 2
    claims = json.loads(out)["claims"]
    assert [c["ok"] for c in claims] == [True, False]


def test_usage_errors(tmp_path, capsys):
    assert _run(capsys, ["constants", "--bogus"])[0] == 1
    assert _run(capsys, ["nosuch"])[0] == 1
    assert _run(capsys, [])[0] == 1
    code, _, err = _run(capsys, ["constants", "--matrix", str(tmp_path / "missing.json")])
    assert code == 1 and "error" in err
    assert _run(capsys, ["construct", "--spec", "cesaro:m=1,c=0.1"])[0] == 1
    assert _run(capsys, ["bounds-table", "--N", "a,b"])[0] == 1


def test_counterexample_pisier(capsys, tmp_path):
    csv_path = tmp_path / "p.csv"
    code, out, _ = _run(capsys, ["counterexample", "pisier", "--M", "32", "--nmax", "8", "--csv", str(csv_path)])
    assert code == 0
    rep = json.loads(out)
    assert rep["command"] == "counterexample pisier"
    assert all(c["ok"] for c in rep["claims"])
    assert len(csv_path.read_text().splitlines()) >= 9


def test_dlp_verify_small(capsys):
    code, out, _ = _run(capsys, ["dlp-verify", "--dim", "6", "--cond", "1", "--n", "1,2", "--grid", "256",
                                 "--trials", "20"])
    assert code == 0
    assert all(c["ok"] for c in json.loads(out)["claims"])


def test_dumps_shortest_repr():
    text = dumps({"b": 0.1, "a": np.float64(1 / 3), "c": np.arange(2)})
    assert json.loads(text) == {"a": 1 / 3, "b": 0.1, "c": [0, 1]}
    assert text.index('"a"') < text.index('"b"') and "0.1," in text


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "kreisslab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "kreisslab" in out.stdout
