import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from scalecalc.cli import SWEEP_HEADER, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def kink(problems_dir):
    return str(problems_dir / "kink_abs.ini")


def write(tmp_path, text, name="p.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_scale_deriv_examples():
    code, text = run("scale-deriv", "--curve", "abs(x)", "--eps", "0.1", "--grid=-1,0,1")
    assert code == 0
    table = rows(text)
    assert table[0] == ["x", "re", "im"]
    got = np.array(table[1:], dtype=float)
    assert np.allclose(got, [[-1, -1, 0], [0, 0, -1], [1, 1, 0]], atol=1e-12)

    code, text = run("scale-deriv", "--curve", "x", "--eps", "0.3", "--grid=-2:2:9")
    got = np.array(rows(text)[1:], dtype=float)
    assert np.allclose(got[:, 1], 1) and np.allclose(got[:, 2], 0)

    code, text = run("scale-deriv", "--curve", "x^2", "--eps", "0.05", "--grid", "1")
    assert np.allclose(np.array(rows(text)[1], dtype=float), [1, 2, -0.05])


def test_scale_deriv_uses_file_defaults(kink):
    code, text = run("scale-deriv", kink, "--numerics", "grid_points=5")
    assert code == 0 and len(rows(text)) == 6


def test_csv_uses_17_significant_digits():
    _, text = run("scale-deriv", "--curve", "x^2", "--eps", "0.1", "--grid", "0.3")
    x, re, im = rows(text)[1]
    assert float(re) == 0.6 or len(re.replace("-", "").replace(".", "").lstrip("0")) >= 15
    assert float(im) == -0.1 or len(im.replace("-", "").replace(".", "").lstrip("0")) >= 15
    # round-trip exactness is what 17 digits buys
    assert f"{float(re):.17g}" == re


def test_el_check_examples(kink, tmp_path):
    code, text = run("el-check", kink)
    assert code == 0 and "verdict: extremal" in text
    csv_path = tmp_path / "sweep.csv"
    code, text = run("el-check", kink, "--lagrangian", "constraint", "--csv", str(csv_path))
    assert code == 1 and "not_extremal" in text
    table = rows(csv_path.read_text())
    assert table[0] == SWEEP_HEADER
    last_eps = [r for r in table[1:] if float(r[0]) == min(float(s[0]) for s in table[1:])]
    for r in last_eps:
        assert float(r[4]) == pytest.approx(2 * abs(float(r[1])), abs=1e-9)


def test_el_check_empty_grid(kink, capsys):
    code, _ = run("el-check", kink, "--numerics", "grid_points=0")
    assert code == 2
    assert "grid" in capsys.readouterr().err


def test_iso_check_examples(kink, problems_dir):
    code, text = run("iso-check", kink, "--kv")
    assert code == 0
    kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line and " " not in line)
    assert abs(float(kv["lambda"])) < 1e-6 and kv["verdict"] == "extremal_confirmed"

    code, text = run("iso-check", str(problems_dir / "kink_abs_K1.ini"), "--kv")
    assert code == 1
    kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line and " " not in line)
    assert float(kv["constraint_gap"]) == pytest.approx(1 / 3, abs=1e-6)


def test_iso_check_missing_constraint(problems_dir, tmp_path, capsys):
    body = (problems_dir / "kink_abs.ini").read_text()
    start, end = body.index("[constraint]"), body.index("[curve]")
    code, text = run("iso-check", write(tmp_path, body[:start] + body[end:]))
    assert code == 2 and text == ""
    assert "[constraint]" in capsys.readouterr().err


@pytest.mark.parametrize("body", [
    "[interval]\na = 1\nb = -1\n",
    "[interval]\na = -1\nb = 1\n[curve]\ny = abs(\n",
    "[interval]\na = -1\nb = 1\n[curve]\ny = x\n[numerics]\nbogus = 1\n",
    "not an ini file",
])
def test_bad_problem_files(tmp_path, body, capsys):
    code, _ = run("sweep", write(tmp_path, body))
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


def test_missing_file(capsys):
    assert run("el-check", "/nonexistent/problem.ini")[0] == 2


def test_sampled_curve_file(tmp_path):
    grid = np.linspace(-1.5, 1.5, 3001)
    (tmp_path / "y.csv").write_text("x,y\n" + "".join(f"{x!r},{abs(x)!r}\n" for x in grid.tolist()))
    path = write(tmp_path, "[interval]\na = -1\nb = 1\n[constraint]\ng = x + y^2\n[curve]\nsamples = y.csv\n"
                           "[numerics]\ngrid_points = 5\n")
    code, text = run("el-check", path, "--lagrangian", "constraint")
    assert code == 1


def test_leibniz_examples(capsys):
    code, text = run("leibniz-test")
    assert code == 0 and "PASS" in text
    code, text = run("leibniz-test", "--trials", "0")
    assert code == 0 and "warning" in capsys.readouterr().err
    assert run("leibniz-test", "--seed", "11")[1] == run("leibniz-test", "--seed", "11")[1]


def test_sweep_examples(kink, problems_dir):
    _, text = run("sweep", kink, "--lagrangian", "constraint", "--numerics", "grid_points=21")
    table = rows(text)
    assert table[0] == SWEEP_HEADER
    sups = {}
    for r in table[1:]:
        sups[float(r[0])] = float(r[6])
    eps = sorted(sups)
    assert abs(sups[eps[0]] - 2) < 1e-9

    _, text = run("sweep", kink, "--numerics", "grid_points=21")
    assert all(float(r[2]) == 0 and float(r[3]) == 0 for r in rows(text)[1:])

    _, text = run("sweep", str(problems_dir / "smooth_v2.ini"), "--numerics", "grid_points=11")
    table = rows(text)[1:]
    x = np.array([float(r[1]) for r in table])
    err = np.array([abs(complex(float(r[2]), float(r[3])) + 4) for r in table])
    e = np.array([float(r[0]) for r in table])
    assert np.allclose(err[np.abs(x) < 1], 0, atol=1e-9)


def test_sweep_functional_and_holder(kink):
    _, text = run("sweep", kink, "--what", "functional", "--lagrangian", "constraint")
    table = rows(text)[1:]
    assert len(table) == 8 and all(r[1] == "" for r in table)
    assert float(table[-1][4]) == pytest.approx(2 / 3, abs=1e-6)
    _, text = run("sweep", kink, "--what", "holder")
    table = rows(text)[1:]
    assert float(table[0][4]) == pytest.approx(1.0, abs=0.05)


def test_defaults_lists_numerics():
    code, text = run("defaults")
    keys = dict(line.split("=") for line in text.splitlines())
    assert code == 0
    assert keys["eps0"] == "0.1" and keys["count"] == "8" and keys["zero_tol"] == "1e-06"


def test_output_is_byte_identical(kink):
    cmd = [sys.executable, "-m", "scalecalc", "sweep", kink, "--lagrangian", "constraint",
           "--numerics", "grid_points=11"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"eps,x,")
