import csv
import json
import subprocess
import sys

import pytest

from thetaschlesinger.cli import main

CURVE = [[0, 0], [1, 0], [2.1, 0.1], [3, 0]]


def run_job(tmp_path, job, command=None, name="job.json", out="out"):
    path = tmp_path / name
    path.write_text(job if isinstance(job, str) else json.dumps(job))
    cmd = command or job["command"]
    code = main([cmd, "--job", str(path), "--out", str(tmp_path / out)])
    return code, tmp_path / out


def test_periods_and_determinism(tmp_path):
    job = {"command": "periods", "curve": CURVE}
    c1, out1 = run_job(tmp_path, job, out="a")
    c2, out2 = run_job(tmp_path, job, out="b")
    assert c1 == c2 == 0
    assert (out1 / "results.json").read_bytes() == (out2 / "results.json").read_bytes()
    res = json.loads((out1 / "results.json").read_text())
    B = res["B"][0][0]
    assert B["im"] > 0
    assert res["errors"]["symmetry_defect"] < 1e-9
    assert res["provenance"]["seed"] == 0
    assert len(res["abel_branch_points"]) == 4


def test_duplicate_points_named(tmp_path, capsys):
    code, _ = run_job(tmp_path, {"command": "periods", "curve": [[0, 0], [1, 0], [0, 0], [3, 0]]})
    assert code == 1
    assert "indices 1 and 3" in capsys.readouterr().err


@pytest.mark.parametrize("job", [
    {"command": "periods", "curve": [[0, 0], [1, 0], [2, 0]]},
    {"command": "periods", "curve": CURVE, "colour": "blue"},
    {"command": "periods", "curve": CURVE, "tolerances": {"theta": 1e-12, "extra": 1}},
    {"command": "solve", "curve": CURVE, "characteristic": {"p": [0.5], "q": [0.0]}},
    {"command": "solve", "curve": CURVE, "characteristic": {"p": [0.2, 0.1], "q": [0.1, 0.1]}},
    {"command": "pvi", "grid": [[1, 0]]},
    {"command": "theta", "genus": 2, "z": [[0.1, 0]]},
])
def test_input_errors_exit_one(tmp_path, job):
    assert run_job(tmp_path, job)[0] == 1


def test_malformed_json_diagnostic(tmp_path, capsys):
    code, _ = run_job(tmp_path, '{"command": "periods",\n  "curve": [[0, 0],, ]}', command="periods")
    assert code == 1
    err = capsys.readouterr().err
    assert "job.json:2:" in err and "malformed JSON" in err


def test_command_mismatch(tmp_path):
    assert run_job(tmp_path, {"command": "tau", "curve": CURVE}, command="periods")[0] == 1


def test_bad_thread_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("THETASCHLESINGER_THREADS", "many")
    assert run_job(tmp_path, {"command": "periods", "curve": CURVE})[0] == 1


def test_pvi_fifty_rows(tmp_path):
    code, out = run_job(tmp_path, {"command": "pvi", "seed": 5})
    assert code == 0
    with open(out / "samples.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t_re", "t_im", "y_re", "y_im", "residual"]
    assert len(rows) == 51
    for r in rows[1:]:
        assert float(r[4]) < 1e-5
    # 17 significant digits round-trip the doubles
    res = json.loads((out / "results.json").read_text())
    first = res["samples"][0]
    assert float(rows[1][2]) == first["y"]["re"]
    assert res["coefficients"] == [0.125, -0.125, 0.125, 0.375]


def test_pvi_threads_do_not_change_output(tmp_path, monkeypatch):
    grid = [[0.3, 0.2], [-0.5, 0.4], [1.7, -0.3]]
    job = {"command": "pvi", "grid": grid, "pvi": {"form": "picard"}}
    _, a = run_job(tmp_path, job, out="serial")
    monkeypatch.setenv("THETASCHLESINGER_THREADS", "2")
    _, b = run_job(tmp_path, job, out="pool")
    assert (a / "samples.csv").read_bytes() == (b / "samples.csv").read_bytes()


def test_tolerance_breach_exits_two(tmp_path):
    job = {"command": "pvi", "grid": [[0.37, 0.0]], "tolerances": {"pvi_residual": 1e-30}}
    code, out = run_job(tmp_path, job)
    assert code == 2
    assert json.loads((out / "results.json").read_text())["exit_code"] == 2


@pytest.mark.parametrize("command", ["theta", "solve", "tau", "monodromy"])
def test_other_commands(tmp_path, command):
    job = {"command": command, "curve": CURVE, "characteristic": {"p": [0.3], "q": [0.1]},
           "z": [[0.1, 0.05]]}
    if command != "theta":
        del job["z"]
    code, out = run_job(tmp_path, job)
    assert code == 0
    res = json.loads((out / "results.json").read_text())
    assert "errors" in res
    assert res["provenance"]["characteristic"] == {"p": [0.3], "q": [0.1]}


def test_verify_genus_one(tmp_path):
    code, out = run_job(tmp_path, {"command": "verify", "genus": 1, "seed": 11})
    assert code == 0
    res = json.loads((out / "results.json").read_text())
    assert set(res["suites"]) == {"periods", "abel", "theta", "schlesinger", "invariants",
                                  "tau", "monodromy", "pvi", "reducible"}
    for checks in res["suites"].values():
        for c in checks:
            assert c["passed"] and "defect" in c and "tol" in c


def test_module_entry_point(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"command": "periods", "curve": CURVE}))
    proc = subprocess.run([sys.executable, "-m", "thetaschlesinger.cli", "periods", "--job", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "o" / "results.json").exists()
