import csv
import json
import math
import subprocess
import sys

import pytest

from selfsim import cli


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_alpha_single(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert cli.main(["alpha", "--k", "1", "--sign", "minus", "--dim", "1", "--out", str(out)]) == 0
    rows = read(out)
    assert list(rows[0]) == cli.ALPHA_COLUMNS
    assert float(rows[0]["alpha"]) == pytest.approx(1.714266138962, abs=1e-9)
    assert "1.71426613896" in capsys.readouterr().out


def test_alpha_table_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["alpha", "--max-k", "1", "--dim", "2", "--out", str(p)]) == 0
    assert a.read_text() == b.read_text()
    assert len(read(a)) == 2


def test_profile_csv_has_zero_rows(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["profile", "--alpha", "2", "--sign", "plus", "--points", "50",
                     "--out", str(out)]) == 0
    rows = read(out)
    assert list(rows[0]) == ["s", "f", "f_prime", "branch", "piece_index", "tail"]
    s = [float(r["s"]) for r in rows]
    assert s == sorted(s)
    assert any(abs(x - math.sqrt(2)) < 1e-12 for x in s)
    assert rows[0]["branch"] == "positive"


def test_appell_csv(tmp_path):
    out = tmp_path / "g.csv"
    assert cli.main(["appell", "--alpha", "1.714266138962", "--sign", "minus", "--points", "20",
                     "--out", str(out)]) == 0
    rows = read(out)
    assert list(rows[0]) == ["r", "f", "psi", "g"]
    for r in rows:
        assert float(r["g"]) == pytest.approx(float(r["psi"]) * float(r["f"]), rel=1e-12, abs=1e-300)


def test_sweep_and_companions(tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--dim", "1", "--s-range", "1.0:1.4:3", "--out", str(out)]) == 0
    rows = read(out)
    assert len(rows) == 3 and list(rows[0])[0] == "s"
    inter = read(tmp_path / "sweep_intersections.csv")
    found = {r["exponent"]: float(r["alpha"]) for r in inter}
    assert found["alpha-_1"] == pytest.approx(1.714266138962, abs=1e-8)
    assert found["alpha+_1"] == pytest.approx(2.397074586069, abs=1e-8)
    heat = read(tmp_path / "sweep_heat.csv")
    for r in heat:
        assert float(r["s_shooting"]) == pytest.approx(float(r["s_oracle"]), abs=1e-8)


def test_verify_suite_exit_code(capsys):
    assert cli.main(["verify", "--suite", "appell", "--dim", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("criterion  8 PASS")
    assert json.loads(lines[-1])["ok"] is True


def test_evolve_short(tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["evolve", "--t-end", "-0.5", "--h", "0.02", "--out", str(out)]) == 0
    rows = read(out)
    assert list(rows[0]) == ["t", "w0", "ratio"]
    assert all(abs(float(r["ratio"]) - 1) < 1e-2 for r in rows)


@pytest.mark.parametrize("argv", [
    ["alpha", "--k", "1"],
    ["alpha", "--max-k", "0"],
    ["profile", "--alpha", "-1", "--sign", "plus"],
    ["sweep", "--s-range", "3:1:5"],
    ["evolve", "--t-end", "0.5"],
])
def test_usage_errors(argv, tmp_path):
    assert cli.main(argv + ["--out-dir", str(tmp_path)]) == 2


def test_zero_tolerance_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("rtol = 0\n")
    assert cli.main(["alpha", "--k", "1", "--sign", "plus", "--config", str(cfg)]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "selfsim.cli", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "sweep" in proc.stdout
