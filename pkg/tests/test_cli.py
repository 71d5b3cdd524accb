from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from tauberkit.cli import main
from tauberkit.ratefun import compose_mk, right_inverse


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_predict_worked_case(capsys):
    code, out, _ = run(["predict", "--M", "poly:1", "--K", "poly:1", "--c", "1", "--t", repr(2 * math.log(6))], capsys)
    assert code == 0
    (row,) = rows(out)
    assert float(row["rate"]) == pytest.approx(1.0, rel=1e-9)


def test_predict_poly2(capsys):
    code, out, _ = run(["predict", "--M", "poly:2", "--K", "poly:2", "--t", "1e8"], capsys)
    (row,) = rows(out)
    assert float(row["mk_inverse"]) == right_inverse(compose_mk("poly:2", "poly:2"), 1e8)


def test_predict_flags_degenerate_rows(capsys):
    code, out, _ = run(["predict", "--M", "poly:1", "--K", "poly:1", "--t", "0.1", "10"], capsys)
    assert code == 0
    assert [r["status"] for r in rows(out)] == ["degenerate", "ok"]


def test_predict_range_json(capsys):
    code, out, _ = run(["predict", "--M", "poly:1", "--K", "logpow:1", "--t-min", "10", "--t-max", "1e6",
                        "--t-count", "5", "--format", "json"], capsys)
    data = json.loads(out)
    assert len(data) == 5 and all(d["status"] == "ok" for d in data)


@pytest.mark.parametrize("argv", [
    ["predict", "--M", "poly:-1", "--K", "poly:1", "--t", "5"],
    ["predict", "--M", "poly(1", "--K", "poly:1", "--t", "5"],
    ["predict", "--M", "poly:1", "--K", "poly:1", "--c", "2", "--t", "5"],
    ["predict", "--M", "poly:1", "--K", "poly:1"],
    ["eval", "--m", "3", "--t", "0"],
    ["eval", "--m", "2", "--t", "0", "--tol", "1e-14"],
    ["eval", "--m", "2", "--t", "0", "--bogus"],
    ["transform", "--m", "5", "--lambda", "1j"],
    ["verify", "--m-list", "2,3"],
    ["report", "/nonexistent/bundle.json"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_eval_rows_and_symmetry(capsys):
    code, out, _ = run(["eval", "--m", "2", "--t", "0", "1.5", "-1.5"], capsys)
    r = rows(out)
    assert code == 0 and [x["status"] for x in r] == ["ok"] * 3
    assert float(r[0]["re"]) == pytest.approx(118371.27068120577, abs=1e-7)
    assert abs(float(r[1]["re"]) - float(r[2]["re"])) <= 1e-10


def test_eval_flags_unmet_tolerance(capsys, monkeypatch):
    import tauberkit.cli as cli

    real = cli.f_eval_many
    monkeypatch.setattr(cli, "f_eval_many", lambda m, ts, tol, strict: real(m, ts, tol, budget=500, strict=strict))
    code, out, _ = run(["eval", "--m", "4", "--t", "3", "--tol", "1e-12"], capsys)
    assert code == 0 and rows(out)[0]["status"] == "tol-not-met"


def test_csv_round_trip_full_precision(capsys):
    code, out, _ = run(["eval", "--m", "4", "--t-min", "0", "--t-max", "2", "--t-count", "5"], capsys)
    code_j, out_j, _ = run(["eval", "--m", "4", "--t-min", "0", "--t-max", "2", "--t-count", "5", "--format", "json"],
                           capsys)
    for c, j in zip(rows(out), json.loads(out_j)):
        assert float(c["re"]) == j["re"] and float(c["t"]) == j["t"]


def test_transform_out_of_strip_flagged(capsys):
    code, out, _ = run(["transform", "--m", "8", "--lambda", "0.5+3j", "0.01+40j"], capsys)
    r = rows(out)
    assert r[0]["status"] == "OutOfStripError" and r[1]["status"] == "ok"


def test_transform_axis_sweep(capsys):
    code, out, _ = run(["transform", "--m", "2", "--im-min", "0", "--im-max", "30", "--im-count", "4"], capsys)
    r = rows(out)
    assert [float(x["im"]) for x in r] == [0.0, 10.0, 20.0, 30.0]
    assert r[0]["log_mag"] == "-inf"


def test_verify_small_bundle_and_report(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--m-list", "2", "--out", str(out1)]) == 0
    assert main(["verify", "--m-list", "2", "--out", str(out2)]) == 0
    a, b = json.loads(out1.read_text()), json.loads(out2.read_text())
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b and len(a["reports"]) >= 8
    capsys.readouterr()
    code, out, _ = run(["report", str(out1)], capsys)
    assert code == 0 and len(rows(out)) == len(a["reports"])


def test_verify_failure_exit_1(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m_list": [2], "strip_c": 0.5}))
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o.json")]) == 1


@pytest.mark.parametrize("content", ["{}", "{\"colour\": 1}", "[1, 2]", "not json", "{\"m_list\": [3]}"])
def test_verify_config_errors_exit_2(tmp_path, content, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert main(["verify", "--config", str(cfg)]) == 2


def test_console_script_and_threads(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tauberkit.cli", "--help"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "predict" in proc.stdout
    proc = subprocess.run(
        [sys.executable, "-m", "tauberkit.cli", "eval", "--m", "2", "--t", "0", "--threads", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("t,re,im")
