import json
import subprocess
import sys

import pytest

from rangetrack.cli import main


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "rangetrack.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture
def short_cfg(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("horizon: 30\n")
    return path


def test_gate(capsys):
    assert main(["gate", "--alpha", "1.2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["drift_coeff"] == pytest.approx(-0.92) and out["stable"]


def test_run_writes_log(tmp_path, short_cfg, capsys):
    assert main(["run", "--config", str(short_cfg), "--seed", "7",
                 "--out", str(tmp_path), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["log"].endswith("run_seed7.json")
    assert len(json.loads(open(out["log"]).read())["records"]) == 31


def test_run_plot(tmp_path, short_cfg, capsys):
    assert main(["run", "--config", str(short_cfg), "--out", str(tmp_path), "--plot"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["figures"]) == 2
    assert all(open(f, "rb").read(8) == b"\x89PNG\r\n\x1a\n" for f in out["figures"])


def test_mc(tmp_path, short_cfg, capsys):
    assert main(["mc", "--config", str(short_cfg), "--runs", "3",
                 "--out", str(tmp_path), "--format", "csv", "--plot"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["results"].endswith(".csv")
    assert "pos_rmse_ss" in out["median"]


def test_check_pe_generated(short_cfg, capsys):
    assert main(["check-pe", "--config", str(short_cfg), "--window", "24"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pe"]["satisfied"] and out["gramian"]["satisfied"]
    assert out["windows"] == 31 - 24 + 1


def test_check_pe_replay(tmp_path, short_cfg, capsys):
    main(["run", "--config", str(short_cfg), "--seed", "2", "--out", str(tmp_path)])
    capsys.readouterr()
    log = tmp_path / "run_seed2.csv"
    assert main(["check-pe", "--config", str(short_cfg), "--log", str(log), "--window", "24"]) == 0
    replay = json.loads(capsys.readouterr().out)
    main(["check-pe", "--config", str(short_cfg), "--window", "24"])
    generated = json.loads(capsys.readouterr().out)
    assert replay["pe"]["lambda_min"] == pytest.approx(generated["pe"]["lambda_min"], rel=1e-9)


def test_fixed_attitude_not_excited(tmp_path, capsys):
    cfg = tmp_path / "fixed.yaml"
    cfg.write_text("horizon: 30\nattitude_mode: fixed\n")
    assert main(["check-pe", "--config", str(cfg), "--window", "10"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert not out["pe"]["satisfied"]


def test_config_dump_roundtrip(tmp_path, capsys):
    assert main(["config"]) == 0
    text = capsys.readouterr().out
    (tmp_path / "c.yaml").write_text(text)
    assert main(["config", "--config", str(tmp_path / "c.yaml")]) == 0
    assert capsys.readouterr().out == text


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("alpha: 2.8\n")
    proc = run_cli("run", "--config", str(cfg), "--out", str(tmp_path))
    assert proc.returncode != 0
    err = json.loads(proc.stderr)
    assert err["error"] == "ConfigError" and err["key"] == "alpha"


def test_missing_config_file(tmp_path):
    proc = run_cli("run", "--config", str(tmp_path / "nope.yaml"))
    assert proc.returncode != 0
    assert "nope.yaml" in json.loads(proc.stderr)["message"]
