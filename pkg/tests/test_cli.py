import csv
import io
import json
import subprocess
import sys

import pytest

from hermite_fk.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve1d_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = _run(capsys, "solve1d", "--sigma", "-1", "--beta", "1", "--trace", str(trace))
    assert code == 0
    assert abs(float(out.split()[1]) - 1.0) <= 1e-8
    rows = list(csv.reader(open(trace)))
    assert rows[0] == ["t", "beta_t", "w"]
    assert float(rows[1][0]) == -12.0
    assert abs(float(rows[-1][1]) - 1.0) <= 1e-8


def test_solve2d(capsys, tmp_path):
    mesh = tmp_path / "mesh.txt"
    code, out, _ = _run(capsys, "solve2d", "--name", "disk", "--h", "0.2", "--mesh-out", str(mesh))
    assert code == 0
    lines = dict(line.split() for line in out.strip().splitlines())
    assert 0.8 < float(lines["lambda1"]) < 1.0
    assert float(lines["residual"]) < 1e-9
    assert int(lines["dofs"]) > 50
    assert mesh.read_text().startswith("v ")


def test_solve2d_unknown_name(capsys):
    code, _, err = _run(capsys, "solve2d", "--name", "nope")
    assert code == 2 and "nope" in err


def test_symmetrize(capsys):
    code, out, _ = _run(capsys, "symmetrize", "--measure", "0.5")
    assert code == 0
    lines = dict(line.split() for line in out.strip().splitlines())
    assert float(lines["sigma_sharp"]) == 0.0
    assert abs(float(lines["g"]) - 0.3989422804014327) < 1e-15
    code, _, err = _run(capsys, "symmetrize", "--measure", "1.5")
    assert code == 2 and "error" in err


def test_sweep(capsys):
    code, out, _ = _run(capsys, "sweep", "--beta", "1", "--sigma-min", "-1", "--sigma-max", "1",
                        "--steps", "5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["sigma", "lambda1"]
    lams = [float(r[1]) for r in rows[1:]]
    assert len(lams) == 5
    assert all(a > b for a, b in zip(lams, lams[1:]))
    assert abs(lams[0] - 1.0) < 1e-8


def test_verify_exit_codes(capsys, tmp_path):
    code, out, _ = _run(capsys, "verify", "--out", str(tmp_path / "ok"), "--workers", "1")
    assert code == 0
    assert out.count("PASS") == 3
    summary = json.loads((tmp_path / "ok" / "summary.json").read_text())
    assert summary["passed"] is True

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"name": "z", "kind": "disk", "center": [0, 0], "radius": 1,
                                "beta": 0}]))
    code, _, err = _run(capsys, "verify", "--corpus", str(bad), "--out", str(tmp_path / "bad"))
    assert code == 2 and "'z'" in err


def test_verify_reports_failure(capsys, tmp_path):
    # a negative tolerance demands a margin no domain reaches
    code, out, _ = _run(capsys, "verify", "--out", str(tmp_path / "o"), "--workers", "1",
                        "--tolerance-fk", "-10")
    assert code == 1
    assert out.count("FAIL") == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hermite_fk", "symmetrize", "--measure", "0.25"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("sigma_sharp -0.674489750196081")


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit):
        main([])
