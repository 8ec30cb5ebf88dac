import json
from pathlib import Path

import numpy as np
import pytest

from foulim import cli, fou


def run(args):
    return cli.main(args)


def test_chaos_subcommand_boundary_classification(tmp_path):
    out = tmp_path / "chaos"
    rc = run(["chaos", "--H", "0.75", "--coeffs", "0,0,1", "--format", "json",
              "--out", str(out)])
    assert rc == 0
    doc = json.loads((tmp_path / "chaos.json").read_text())
    assert doc["hermite_rank"] == 2
    assert doc["h_star"] == pytest.approx(0.5)
    assert doc["regime"] == "boundary"
    assert "ln" in doc["alpha_formula"]
    assert doc["schema_version"] == 1


def test_sample_fbm_deterministic_and_config_round_trip(tmp_path):
    a = tmp_path / "runa"
    b = tmp_path / "runb"
    args = ["sample-fbm", "--H", "0.7", "--n-steps", "64", "--replicas", "3",
            "--seed", "9"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert (tmp_path / "runa.csv").read_bytes() == (tmp_path / "runb.csv").read_bytes()
    # config echo re-ingestion reproduces the run bit-exactly
    c = tmp_path / "runc"
    assert run(["--config", str(tmp_path / "runa.config"), "--out", str(c)]) == 0
    assert (tmp_path / "runc.csv").read_bytes() == (tmp_path / "runa.csv").read_bytes()


def test_csv_schema_and_float_format(tmp_path):
    out = tmp_path / "rho"
    assert run(["rho", "--H", "0.6", "--s-max", "2.0", "--n-points", "5",
                "--out", str(out)]) == 0
    lines = (tmp_path / "rho.csv").read_text().splitlines()
    assert lines[0] == "s,rho"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == 1.0
    # 17-significant-digit round trip
    val = float(lines[3].split(",")[1])
    assert f"{val:.17g}" == lines[3].split(",")[1]


def test_constants_command_m1_limit_is_sigma(tmp_path):
    out = tmp_path / "const"
    assert run(["constants", "--H", "0.8", "--coeffs", "0,1", "--format", "json",
                "--out", str(out)]) == 0
    doc = json.loads((tmp_path / "const.json").read_text())
    assert doc["regime"] == "long_range"
    assert doc["c"] == pytest.approx(fou.stationary_sigma(0.8), rel=1e-9)
    assert doc["sigma"] == pytest.approx(fou.stationary_sigma(0.8), rel=1e-12)


def test_sample_fou_csv(tmp_path):
    out = tmp_path / "fou"
    assert run(["sample-fou", "--H", "0.7", "--eps", "0.1", "--horizon", "0.5",
                "--n-steps", "100", "--replicas", "2", "--seed", "3",
                "--out", str(out)]) == 0
    lines = (tmp_path / "fou.csv").read_text().splitlines()
    assert lines[0] == "replica,t,value"
    assert len(lines) == 1 + 2 * 101


def test_hermite_sample_runs(tmp_path):
    out = tmp_path / "herm"
    assert run(["hermite-sample", "--H", "0.7", "--m", "2", "--xi-window", "30",
                "--n-xi", "2000", "--n-steps", "50", "--replicas", "2",
                "--seed", "4", "--out", str(out)]) == 0
    lines = (tmp_path / "herm.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 51


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run(["no-such-command"]) == 1
    assert run(["sample-fbm"]) == 1  # missing required --H
    assert run([]) == 1


def test_domain_errors_exit_2(tmp_path):
    # Hurst parameter out of range -> numerical/domain failure
    assert run(["sample-fbm", "--H", "1.7", "--out", str(tmp_path / "x")]) == 2


def test_clt_scan_json_summary(tmp_path):
    out = tmp_path / "scan"
    rc = run(["clt-scan", "--H", "0.6", "--coeffs", "0,0,1",
              "--eps-list", "0.2,0.1,0.05", "--replicas", "400",
              "--seed", "12", "--out", str(out)])
    assert rc == 0
    doc = json.loads((tmp_path / "scan.json").read_text())
    assert doc["regime"] == "short_range"
    assert doc["expected_slope"] == -1.0
    assert "slope_ci" in doc and len(doc["slope_ci"]) == 2
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "eps,statistic,stderr,n"
    assert len(lines) == 4


def test_config_echo_contents(tmp_path):
    out = tmp_path / "echo"
    assert run(["rho", "--H", "0.6", "--s-max", "1.0", "--n-points", "3",
                "--out", str(out)]) == 0
    text = (tmp_path / "echo.config").read_text()
    assert "[run]" in text and "command = rho" in text
    assert "s_max" in text
