from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from ordersfde.cli import main


def _run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def _events(tmp_path, events):
    path = tmp_path / "events.json"
    path.write_text(json.dumps(events))
    return str(path)


def test_psi_table(tmp_path, capsys):
    assert _run(tmp_path, "psi-table", "--n", "1", "--points", "0,0.25,2") == 0
    rows = list(csv.DictReader((tmp_path / "psi_table.csv").open()))
    assert [float(r["psi"]) for r in rows][-1] == 1.5
    assert float(rows[1]["psi_second"]) == 1.0
    assert "1.5" in capsys.readouterr().out


def test_verify_order_on_zero(tmp_path):
    code = _run(tmp_path, "verify-order", "--coeff", "builtin:zero", "--init", "const:0", "--initbar", "const:1",
                "--paths", "20", "--step", "0.1", "--expect-pass")  # fmt: skip
    assert code == 0
    summary = json.loads((tmp_path / "order.json").read_text())
    assert summary["result"]["hard_sup"] == 0.0
    rows = list(csv.reader((tmp_path / "hard_sup_per_path.csv").open()))
    assert len(rows) == 21


def test_verify_order_violation_exit_code(tmp_path):
    base = ["verify-order", "--coeff", "builtin:negating_jump", "--init", "const:-2", "--initbar", "const:-1",
            "--paths", "4", "--step", "0.1", "--horizon", "2", "--inject", _events(tmp_path, [[1.0, 0]])]  # fmt: skip
    assert _run(tmp_path, *base) == 0
    assert _run(tmp_path, *base, "--expect-pass") == 1


def test_check_conditions_exit_codes(tmp_path):
    args = ["check-conditions", "--coeff", "builtin:delayed_diffusion", "--samples", "500"]
    assert _run(tmp_path, *args) == 0
    assert _run(tmp_path, *args, "--expect-pass") == 1
    report = json.loads((tmp_path / "conditions.json").read_text())["result"]
    assert report["diffusion"]["verdict"] == "fail"
    assert report["drift"]["evidence"] == "sampled"


def test_unknown_subcommand_and_usage_errors(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2
    assert _run(tmp_path, "simulate", "--coeff", "builtin:nope", "--init", "const:0", "--step", "0.1") == 2
    assert _run(tmp_path, "simulate", "--coeff", "builtin:zero", "--init", "banana", "--step", "0.1") == 2
    assert _run(tmp_path, "verify-order", "--coeff", "builtin:zero", "--init", "const:1", "--initbar", "const:0",
                "--step", "0.1") == 2  # fmt: skip
    assert _run(tmp_path, "psi-table", "--n", "x") == 2
    assert "error" in capsys.readouterr().err


def test_simulate_outputs(tmp_path):
    code = _run(tmp_path, "simulate", "--coeff", "builtin:constant_jump", "--init", "const:0.5", "--seed", "3",
                "--paths", "2", "--step", "0.1", "--horizon", "2", "--inject", _events(tmp_path, [[1.0, 0]]))  # fmt: skip
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "paths" / "path_00000.csv").open()))
    assert list(rows[0]) == ["t", "X1", "jump"]
    jumps = [r for r in rows if r["jump"] == "1"]
    assert len(jumps) == 1 and float(jumps[0]["t"]) == 1.0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["config"]["seed"] == 3 and summary["config"]["solver"]["h"] == 0.1


def test_files_as_inputs(tmp_path):
    coeff = tmp_path / "coeff.json"
    coeff.write_text(json.dumps({"d": 1, "m": 1, "r0": 0, "b": ["1"], "barred": {"b": ["0"]}}))
    init = tmp_path / "init.json"
    init.write_text(json.dumps({"d": 1, "r0": 0, "nodes": [[0.0, [0.0]]]}))
    events = tmp_path / "events.json"
    events.write_text(json.dumps([[0.5, 0]]))
    out = tmp_path / "out"
    assert (
        main(["necessity-probe", "--coeff", str(coeff), "--init", str(init), "--initbar", str(init), "--out", str(out)])
        == 0
    )
    assert json.loads((out / "probe.json").read_text())["result"]["verdict"] == "violation"
    assert main(["necessity-probe", "--coeff", str(coeff), "--init", str(init), "--initbar", str(init),
                 "--expect-pass", "--out", str(out)]) == 1  # fmt: skip
    jump = tmp_path / "jump.json"
    jump.write_text(json.dumps({"builtin": "constant_jump"}))
    assert main(["simulate", "--coeff", str(jump), "--init", str(init), "--step", "0.1", "--inject", str(events),
                 "--out", str(out)]) == 0  # fmt: skip
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"r0": 0}))
    assert main(["simulate", "--coeff", str(jump), "--init", str(bad), "--step", "0.1", "--out", str(out)]) == 2


def test_bihari_and_cascade(tmp_path):
    assert _run(tmp_path, "bihari", "--u", "one", "--a", "1", "--c", "1", "--t", "1") == 0
    assert json.loads((tmp_path / "bihari.json").read_text())["result"]["bound"] == pytest.approx(2.718281828459045)
    assert _run(tmp_path, "existence-cascade", "--coeff", "builtin:abs_drift", "--init", "const:0", "--levels", "1,2,4",
                "--step", "0.05", "--horizon", "1", "--samples", "500") == 0  # fmt: skip
    gaps = json.loads((tmp_path / "cascade.json").read_text())["result"]["gaps"]
    assert [g["n"] for g in gaps] == [1, 2, 4]


def test_replay_is_byte_identical(tmp_path):
    argv = ["simulate", "--coeff", "builtin:geometric_diffusion", "--param", "s=0.3", "--init", "const:1",
            "--paths", "3", "--step", "0.05", "--seed", "11"]  # fmt: skip
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == 0
    replay = json.loads((a / "summary.json").read_text())["replay"]
    assert main(replay + ["--out", str(b)]) == 0
    for f in ["summary.json", "paths/path_00000.csv", "paths/path_00002.csv"]:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ORDERSFDE_OUT", str(tmp_path / "env"))
    assert main(["psi-table", "--n", "2", "--points", "1"]) == 0
    assert (tmp_path / "env" / "psi_table.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ordersfde", "psi-table", "--n", "1", "--points", "2", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "ordersfde", "nonsense"], capture_output=True, text=True)
    assert proc.returncode == 2
