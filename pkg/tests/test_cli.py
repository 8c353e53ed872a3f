from __future__ import annotations

import csv
import io
import json

import pytest

from spherecurv import cli
from spherecurv import curvature_core as cc


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_text(capsys):
    code, out, _ = run(capsys, "classify", "1", "1", "1")
    assert code == 0
    assert "PositiveCurvature" in out


def test_classify_mixed_json(capsys):
    code, out, _ = run(capsys, "classify", "0.25", "0.25", "0.33", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0
    assert row["verdict"] == "MixedCurvature" and row["binding_index"] == 3


def test_classify_boundary_prints_Z(capsys):
    code, out, _ = run(capsys, "classify", "0.25", "0.25", "0.325", "--format", "csv")
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["verdict"] == "Boundary"
    assert float(row["Z"]) == pytest.approx(16 / 11, rel=1e-12)


@pytest.mark.parametrize("argv", [("classify", "0", "1", "1"), ("classify", "-1", "1", "1"), ("classify", "x", "1", "1")])
def test_classify_bad_params_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(list(argv))
    assert exc.value.code == 2


def test_pinch_values(capsys):
    code, out, _ = run(capsys, "pinch", "0.2", "--format", "json")
    assert code == 0 and json.loads(out)[0]["delta"] == pytest.approx(0.04, abs=1e-15)
    code, out, _ = run(capsys, "pinch", "1.0", "--format", "json")
    assert json.loads(out)[0]["delta"] == pytest.approx(1.0)


def test_pinch_out_of_range_exit_2(capsys):
    code, _, err = run(capsys, "pinch", "1.5")
    assert code == 2 and "4/3" in err


def test_pinch_verify(capsys):
    code, out, _ = run(capsys, "pinch", "1.2", "--verify", "--restarts", "16", "--format", "json")
    row = json.loads(out)[0]
    assert code == 0
    assert row["verified"] is True and row["max_abs_diff"] < 1e-4


def test_sweep_csv_schema_and_precision(capsys):
    code, out, _ = run(capsys, "sweep", "figure1", "--points", "5", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,delta,natural_delta,difference"
    assert len(lines) == 6
    assert lines[1].split(",")[0] == format(4 / 3 / 6, ".17g")
    assert "\r" not in out


def test_sweep_json_mirrors_csv(capsys):
    _, out_csv, _ = run(capsys, "sweep", "figure8", "--points", "4", "--format", "csv")
    _, out_json, _ = run(capsys, "sweep", "figure8", "--points", "4", "--format", "json")
    rows = list(csv.DictReader(io.StringIO(out_csv)))
    data = json.loads(out_json)
    assert [list(r) for r in rows] == [list(d) for d in data]
    assert [float(r["difference"]) for r in rows] == [d["difference"] for d in data]


def test_sweep_is_reproducible_and_parallel_safe(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "figure6", "--points", "12", "--out", str(a)]) == 0
    assert cli.main(["sweep", "figure6", "--points", "12", "--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_bad_points_exit_2(capsys):
    code, _, _ = run(capsys, "sweep", "figure1", "--points", "1")
    assert code == 2


def test_figure7_endpoints(capsys):
    _, out, _ = run(capsys, "sweep", "figure7", "--points", "11", "--format", "json")
    rows = json.loads(out)
    assert (rows[0]["t1"], rows[0]["boundary_t3"]) == (0.0, 0.0)
    assert rows[-1]["t1"] == 0.5
    assert rows[-1]["boundary_t3"] == pytest.approx(2 / 3, abs=1e-12)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "opt.cfg"
    cfg.write_text("# defaults\nrestarts = 8\nseed = 3\ngtol=1e-8\n")
    args = cli.build_parser().parse_args(["pinch", "1.1", "--config", str(cfg), "--seed", "5"])
    config = cli.build_config(args)
    assert (config.restarts, config.seed, config.gtol) == (8, 5, 1e-8)


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "pinch", "1.1", "--config", str(cfg))
    assert code == 2 and "unknown config key" in err
    code, _, _ = run(capsys, "pinch", "1.1", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_verify_components_passes(capsys):
    code, out, _ = run(capsys, "verify", "components")
    assert code == 0 and out.startswith("PASS")


def test_verify_oracle_passes(capsys):
    code, _, _ = run(capsys, "verify", "oracle")
    assert code == 0


def test_verify_oracle_detects_tampered_formula(capsys, monkeypatch):
    original = cc.curvature_quadratic
    monkeypatch.setattr(cc, "curvature_quadratic", lambda params, p: 1.01 * original(params, p))
    code, out, _ = run(capsys, "verify", "oracle")
    assert code == 3
    assert "FAIL oracle/reduced" in out


def test_verify_components_detects_tampered_table(capsys, monkeypatch):
    original = cc.component_table

    def shifted(params, n=3):
        rows = original(params, n)
        rows[0] = cc.ComponentEntry(rows[0].indices, rows[0].value + 1e-3, rows[0].pattern)
        return rows

    monkeypatch.setattr(cc, "component_table", shifted)
    code, _, _ = run(capsys, "verify", "components")
    assert code == 3


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "spherecurv", "classify", "1", "1", "1", "--format", "csv"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "PositiveCurvature" in res.stdout
