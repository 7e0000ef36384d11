import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hypererg import reports, streams
from hypererg.cli import EXIT_FLAGGED, EXIT_INPUT, EXIT_OK, main

GOLDEN = Path(__file__).parent / "golden"
CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _without_wall_time(data):
    for rec in data["records"]:
        rec.pop("wall_time")
    return data


def test_decompose_rows(capsys):
    code, out, _ = run(capsys, "decompose", "2", "1", "1", "1")
    assert code == EXIT_OK
    version, rows = reports.read_csv(out)
    assert version == 1
    vals = {(r["decomposition"], r["coordinate"]): float(r["value"]) for r in rows}
    # cosh r = (a^2 + b^2 + c^2 + d^2) / 2
    assert vals[("cartan", "r")] == pytest.approx(math.acosh(3.5), rel=1e-12)
    assert vals[("cartan", "residual")] <= 1e-12 and vals[("iwasawa", "residual")] <= 1e-12
    assert vals[("iwasawa", "s")] == pytest.approx(math.log(5.0), rel=1e-14)


def test_decompose_rejects_non_unimodular(capsys):
    code, _, err = run(capsys, "decompose", "2", "0", "0", "1")
    assert code == EXIT_INPUT and "error" in err


def test_density_json(capsys):
    code, out, _ = run(capsys, "density", "--profile", "su21", "--t", "1.0", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["schema_version"] == 1
    assert data["rows"][0]["density"] == pytest.approx(2.5045245, abs=1e-7)


def test_density_psi_grid(capsys):
    code, out, _ = run(capsys, "density", "--which", "psi", "--t", "0:4:5")
    _, rows = reports.read_csv(out)
    assert [float(r["density"]) for r in rows] == pytest.approx([0, 1, 2, 3, 4])


def test_density_rejects_negative_grid(capsys):
    assert run(capsys, "density", "--t=-1,2")[0] == EXIT_INPUT
    assert run(capsys, "density", "--t", "a:b")[0] == EXIT_INPUT
    assert run(capsys, "density", "--profile", "g2")[0] == EXIT_INPUT


def test_sample_shell(capsys):
    code, out, _ = run(capsys, "sample", "--kind", "shell", "--r", "5", "--eps", "0.1", "--n", "200")
    assert code == EXIT_OK
    _, rows = reports.read_csv(out)
    assert len(rows) == 200
    m = np.array([[float(r[k]) for k in "abcd"] for r in rows])
    assert np.allclose(m[:, 0] * m[:, 3] - m[:, 1] * m[:, 2], 1.0, atol=1e-9)
    r = np.array([float(row["r"]) for row in rows])
    assert np.all((r >= 5 - 1e-9) & (r <= 5.1 + 1e-9))


def test_sample_sector_arcs(capsys):
    code, out, _ = run(capsys, "sample", "--kind", "sector", "--r", "3", "--eps", "0.5",
                       "--left", "0,0.25", "--right", "0.5,0.75", "--n", "50", "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out)["rows"]) == 50


def test_sample_other_profile_gives_radii(capsys):
    code, out, _ = run(capsys, "sample", "--profile", "f4", "--r", "2", "--eps", "0.5", "--n", "30")
    _, rows = reports.read_csv(out)
    assert list(rows[0]) == ["t"]
    assert all(2.0 <= float(r["t"]) <= 2.5 for r in rows)


def test_sample_is_seeded(capsys):
    a = run(capsys, "sample", "--r", "2", "--n", "5", "--seed", "3")[1]
    b = run(capsys, "sample", "--r", "2", "--n", "5", "--seed", "3")[1]
    c = run(capsys, "sample", "--r", "2", "--n", "5", "--seed", "4")[1]
    assert a == b and a != c


def test_sample_bad_input(capsys):
    assert run(capsys, "sample", "--r", "2", "--eps", "0")[0] == EXIT_INPUT
    assert run(capsys, "sample", "--kind", "sector", "--r", "2", "--left", "x")[0] == EXIT_INPUT


def test_converge_matches_golden(capsys, tmp_path):
    code, out, _ = run(capsys, "converge", str(GOLDEN / "small_converge.toml"), "--out", str(tmp_path / "rep"))
    assert code == EXIT_OK
    assert out == (GOLDEN / "small_converge.csv").read_text()
    assert (tmp_path / "rep.csv").read_text() == out
    got = _without_wall_time(json.loads((tmp_path / "rep.json").read_text()))
    want = _without_wall_time(json.loads((GOLDEN / "small_converge.json").read_text()))
    assert got == want


def test_converge_flagged_exit_code(capsys):
    code, out, _ = run(capsys, "converge", str(GOLDEN / "flagged_converge.toml"), "--format", "json")
    assert code == EXIT_FLAGGED
    data = json.loads(out)
    assert data["flagged_radii"] == [1.0] and data["passed"] is False


def test_converge_input_errors(capsys, tmp_path):
    assert run(capsys, "converge", str(tmp_path / "missing.toml"))[0] == EXIT_INPUT
    bad = tmp_path / "bad.toml"
    bad.write_text("schema_version = 1\nseed = -4\n")
    assert run(capsys, "converge", str(bad))[0] == EXIT_INPUT
    assert run(capsys, "converge", str(GOLDEN / "small_converge.toml"), "--workers", "0")[0] == EXIT_INPUT
    assert run(capsys, "converge", str(GOLDEN / "small_converge.toml"), "--seed", "-1")[0] == EXIT_INPUT


def test_env_workers_used(capsys, monkeypatch):
    monkeypatch.setenv(streams.WORKERS_ENV, "2")
    _, out_env, _ = run(capsys, "converge", str(GOLDEN / "small_converge.toml"))
    monkeypatch.delenv(streams.WORKERS_ENV)
    _, out_flag, _ = run(capsys, "converge", str(GOLDEN / "small_converge.toml"), "--workers", "2")
    assert out_env == out_flag
    assert out_env != (GOLDEN / "small_converge.csv").read_text()
    monkeypatch.setenv(streams.WORKERS_ENV, "zero")
    assert run(capsys, "converge", str(GOLDEN / "small_converge.toml"))[0] == EXIT_INPUT


def test_seed_override_changes_result(capsys):
    a = run(capsys, "converge", str(GOLDEN / "small_converge.toml"), "--seed", "6")[1]
    assert a != (GOLDEN / "small_converge.csv").read_text()


def test_maximal(capsys, tmp_path):
    code, out, _ = run(capsys, "maximal", str(GOLDEN / "small_converge.toml"), "--format", "json",
                       "--out", str(tmp_path / "max"))
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["schema_version"] == 1 and 0 < data["ratio"] < 5
    assert (tmp_path / "max.csv").exists()
    assert run(capsys, "maximal", str(GOLDEN / "small_converge.toml"), "--p", "1")[0] == EXIT_INPUT


def test_torus_config_runs(capsys):
    code, out, _ = run(capsys, "converge", str(CONFIG_DIR / "torus_window.toml"))
    assert code == EXIT_OK
    _, rows = reports.read_csv(out)
    assert len(rows) == 9


def test_check_command(capsys):
    code, out, _ = run(capsys, "check")
    assert code == EXIT_OK
    assert out.count("PASS") >= 7 and "FAIL" not in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hypererg.cli", "decompose", "1", "0", "0", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("# schema_version=1")
    proc = subprocess.run([sys.executable, "-m", "hypererg.cli", "decompose", "1", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
