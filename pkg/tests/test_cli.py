import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qrw2d import io
from qrw2d.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main

GOLDEN = Path(__file__).parent / "golden"
S_HALF = '{"family": "S", "t": 0.5}'
S_EIGHTH = '{"family": "S", "t": 0.125}'
B_HALF = '{"family": "B", "t": 0.5}'
NON_UNITARY = json.dumps({"family": "custom",
                          "coin": [[[2.0, 0.0] if i == j else [0.0, 0.0] for j in range(4)]
                                   for i in range(4)]})


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_csv_golden(capsys):
    code, out, _ = run(["simulate", "--model", S_HALF, "--n", "1"], capsys)
    assert code == EXIT_OK
    assert out == (GOLDEN / "S_half_n1.csv").read_text()


def test_simulate_pgm_golden(tmp_path, capsys):
    out = tmp_path / "p.pgm"
    code, _, _ = run(["simulate", "--model", S_HALF, "--n", "1", "--format", "pgm",
                      "--out", str(out)], capsys)
    assert code == EXIT_OK
    assert out.read_bytes() == (GOLDEN / "S_half_n1.pgm").read_bytes()


def test_simulate_time_zero_is_one_pixel(tmp_path, capsys):
    out = tmp_path / "z.pgm"
    run(["simulate", "--model", B_HALF, "--n", "0", "--format", "pgm", "--out", str(out)], capsys)
    assert io.read_pgm(out.read_bytes()).tolist() == [[65535]]


def test_simulate_B_half_rounded_diamond(tmp_path, capsys):
    out = tmp_path / "b.pgm"
    run(["simulate", "--model", B_HALF, "--n", "200", "--format", "pgm", "--out", str(out)], capsys)
    img = io.read_pgm(out.read_bytes()).astype(float)
    assert img.shape == (401, 401)
    c = 200
    inner = img[c - 60:c + 61, c - 60:c + 61].mean()
    corner = img[c - 180:c - 140, c + 140:c + 180].mean()
    assert inner > 2 * corner


def test_simulate_multiple_formats(tmp_path, capsys):
    base = tmp_path / "run"
    code, _, _ = run(["simulate", "--model", S_HALF, "--n", "3", "--format", "csv,pgm,json",
                      "--out", str(base)], capsys)
    assert code == EXIT_OK
    for suffix in ("csv", "pgm", "json"):
        assert (tmp_path / f"run.{suffix}").exists()
    data = json.loads((tmp_path / "run.json").read_text())
    assert data["total_probability"] == pytest.approx(1.0, abs=1e-12)


def test_shape_cloud(capsys):
    code, out, _ = run(["shape", "--model", S_EIGHTH, "--grid", "10"], capsys)
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert len(lines) == 401
    v = np.array([[float(x) for x in line.split(",")[4:6]] for line in lines[1:]])
    assert np.max(np.abs(v)) <= 1


def test_shape_pgm(tmp_path, capsys):
    out = tmp_path / "s.pgm"
    code, _, _ = run(["shape", "--model", S_EIGHTH, "--grid", "60", "--format", "pgm",
                      "--size", "64", "--out", str(out)], capsys)
    assert code == EXIT_OK
    img = io.read_pgm(out.read_bytes())
    assert img.shape == (64, 64)
    assert img.min() < 65535 and img[0, 0] == 65535


def test_compare_statuses(capsys):
    dirs = "20,40,200;21,40,200;170,0,200"
    code, out, _ = run(["compare", "--model", B_HALF, "--directions", dirs], capsys)
    assert code == EXIT_OK
    rows = json.loads(out)["runs"]["start"]["directions"]
    inside, parity, outside = rows
    assert inside["status"] == "Inside" and np.isfinite(inside["relative_error"])
    assert parity["exact_probability"] == 0.0 and parity["predicted_probability"] == 0.0
    assert outside["status"] == "Outside"
    assert outside["exact_probability"] < 1e-12 and outside["predicted_probability"] == 0.0


def test_compare_all_starts(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, _, _ = run(["compare", "--model", S_EIGHTH, "--directions", "10,20,100",
                      "--all-starts", "--out", str(out)], capsys)
    assert code == EXIT_OK
    assert list(json.loads(out.read_text())["runs"]) == ["e1", "e2", "e3", "e4"]


def test_directions_file(tmp_path, capsys):
    f = tmp_path / "dirs.txt"
    f.write_text("10,20,100\n4,6,100\n")
    code, out, _ = run(["compare", "--model", S_EIGHTH, "--directions", str(f)], capsys)
    assert code == EXIT_OK
    assert len(json.loads(out)["runs"]["start"]["directions"]) == 2


def test_critical_velocity(capsys):
    code, out, _ = run(["critical", "--model", B_HALF, "--v", "0.1,0.2"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)["reports"][0]
    assert rep["status"] == "Inside" and rep["points"]


def test_check_passes_for_S_half(capsys):
    code, out, err = run(["check", "--model", S_HALF], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["passed"]
    assert "sqrt(t)/sqrt(2)" in err


def test_check_B_half_includes_singular_set(capsys):
    code, out, _ = run(["check", "--model", B_HALF], capsys)
    names = {c["name"]: c["passed"] for c in json.loads(out)["checks"]}
    assert code == EXIT_OK and names["B_singular_set"]


def test_check_fails_at_torality_for_non_unitary(capsys):
    code, out, _ = run(["check", "--model", NON_UNITARY], capsys)
    assert code == EXIT_CHECK
    first = json.loads(out)["checks"][0]
    assert first["name"] == "torality" and not first["passed"]


@pytest.mark.parametrize("args", [
    ["simulate", "--model", '{"family": "S", "t": 0.5, "x": 1}'],
    ["simulate", "--model", NON_UNITARY],
    ["simulate", "--model", S_HALF, "--tol", "bogus=1"],
    ["simulate", "--model", S_HALF, "--tol", "dedup"],
    ["simulate", "--model", S_HALF, "--start", "1,1,0,0"],
    ["simulate", "--model", S_HALF, "--format", "png"],
    ["simulate", "--model", S_HALF, "--n", "-1"],
    ["compare", "--model", S_HALF],
    ["critical", "--model", S_HALF, "--v", "1.5,0"],
    ["simulate", "--model", "/no/such/file.json"],
    ["frobnicate"],
])
def test_config_errors_exit_2(args, capsys):
    try:
        code = main(args)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_CONFIG


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"family": "S", "t": 0.5}, "n": 1}))
    code, out, _ = run(["simulate", "--config", str(cfg)], capsys)
    assert code == EXIT_OK and out == (GOLDEN / "S_half_n1.csv").read_text()
    cfg.write_text(json.dumps({"model": {"family": "S", "t": 0.5}, "colour": 1}))
    assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG


def test_start_vector_complex(capsys):
    code, out, _ = run(["simulate", "--model", S_HALF, "--n", "2",
                        "--start", "0.5,0.5j,-0.5,0.5"], capsys)
    assert code == EXIT_OK
    p = sum(float(line.split(",")[2]) for line in out.strip().splitlines()[1:])
    assert p == pytest.approx(1.0, abs=1e-12)


def test_subprocess_is_byte_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "qrw2d", "shape", "--model", S_EIGHTH, "--grid", "12"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"alpha,beta,sheet,gamma,v1,v2,K\n")


def test_subprocess_exit_codes():
    bad = subprocess.run([sys.executable, "-m", "qrw2d", "simulate", "--model", "{}"],
                         capture_output=True)
    assert bad.returncode == EXIT_CONFIG
    fail = subprocess.run([sys.executable, "-m", "qrw2d", "check", "--model", NON_UNITARY],
                          capture_output=True)
    assert fail.returncode == EXIT_CHECK
