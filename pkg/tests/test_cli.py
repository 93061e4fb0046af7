import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "ehaloha.cli"]


def invoke(*args, **kwargs):
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, **kwargs
    )


def test_no_arguments_usage_exit_2():
    result = invoke()
    assert result.returncode == 2
    assert "usage" in result.stderr.lower()


def test_unknown_subcommand_exit_2():
    result = invoke("decode")
    assert result.returncode == 2


def test_stochastic_commands_require_seed():
    result = invoke("simulate", "--system", "equivalent", "--horizon", "100")
    assert result.returncode == 2
    result = invoke("sweep", "--system", "equivalent", "--horizon", "100",
                    "--out", "/tmp/x.csv")
    assert result.returncode == 2


def test_battery_json_output():
    result = invoke("battery", "--q1", "0.4", "--q2", "0.4", "--ph1", "0.6")
    assert result.returncode == 0
    data = json.loads(result.stdout)
    assert data["closed_form"] == pytest.approx(0.48387, abs=1e-5)
    assert data["abs_diff"] < 1e-9


def test_battery_finite_and_full_duplex():
    result = invoke("battery", "--q1", "0.4", "--q2", "0.4", "--ph1", "0.6",
                    "--battery-capacity", "1")
    data = json.loads(result.stdout)
    assert data["closed_form"] == pytest.approx(0.375, abs=1e-9)

    result = invoke("battery", "--duplex", "full", "--q1", "0.4", "--q2", "0.7",
                    "--ph1", "0.2", "--ph2", "0.2", "--ph12", "0.35")
    data = json.loads(result.stdout)
    assert data["closed_form"] == pytest.approx(0.13937, abs=1e-5)
    # finite full-duplex has no closed form: runtime error, not usage error
    result = invoke("battery", "--duplex", "full", "--battery-capacity", "2")
    assert result.returncode == 1
    assert "closed form" in result.stderr


def test_region_boundary_contains_corner(tmp_path):
    out = tmp_path / "rd.csv"
    result = invoke("region", "--kind", "rd", "--q1", "0.4", "--q2", "0.4",
                    "--ph1", "0.6", "--out", str(out))
    assert result.returncode == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    points = [(float(a), float(b)) for a, b in rows]
    assert any(
        abs(x - 0.32258) < 1e-4 and abs(y - 0.11613) < 1e-4 for x, y in points
    )
    assert (tmp_path / "rd.csv.meta.json").exists()


def test_region_traced_and_grid(tmp_path):
    out = tmp_path / "closure.csv"
    grid_out = tmp_path / "closure_grid.csv"
    result = invoke("region", "--kind", "closure", "--ph1", "0.6",
                    "--trace", "--points", "11",
                    "--out", str(out), "--grid", "20", "--grid-out", str(grid_out))
    assert result.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda1,lambda2" and len(lines) == 12
    grid_lines = grid_out.read_text().splitlines()
    assert grid_lines[0] == "lambda1,lambda2,inside"
    assert grid_lines[1] == "0,0,1"


def test_region_finite_requires_capacity(tmp_path):
    result = invoke("region", "--kind", "finite", "--out", str(tmp_path / "f.csv"))
    assert result.returncode == 1
    assert "battery-capacity" in result.stderr


def test_simulate_json_and_paths(tmp_path):
    paths = tmp_path / "paths.csv"
    result = invoke(
        "simulate", "--system", "equivalent", "--horizon", "2000", "--seed", "5",
        "--lambda1", "0.2", "--lambda2", "0.05", "--ph1", "0.6",
        "--paths", str(paths), "--decimation", "100",
    )
    assert result.returncode == 0
    data = json.loads(result.stdout)
    assert data["slots"] == 2000
    assert 0.0 <= data["battery_occupancy"] <= 1.0
    lines = paths.read_text().splitlines()
    assert lines[0] == "slot,q1,q2,battery" and len(lines) == 21
    sidecar = json.loads((tmp_path / "paths.csv.meta.json").read_text())
    assert sidecar["context"]["seed"] == 5


def test_simulate_deterministic():
    args = ("simulate", "--system", "deprived", "--horizon", "3000", "--seed", "9",
            "--lambda1", "0.3", "--lambda2", "0.05")
    assert invoke(*args).stdout == invoke(*args).stdout


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    result = invoke(
        "sweep", "--system", "equivalent", "--horizon", "2000", "--seed", "1",
        "--n1", "2", "--n2", "2", "--lambda1-max", "0.1", "--lambda2-max", "0.02",
        "--out", str(out),
    )
    assert result.returncode == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    sidecar = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert sidecar["sweep"]["grid"]["n1"] == 2
    assert sidecar["sweep"]["effective_config"] == {}


def test_coupled_paths_dominance_summary(tmp_path):
    prefix = tmp_path / "coupled"
    result = invoke(
        "coupled-paths", "--systems", "deprived,equivalent",
        "--horizon", "20000", "--seed", "0",
        "--lambda1", "0.0931", "--lambda2", "0.0414", "--ph1", "0.6",
        "--out-prefix", str(prefix),
    )
    assert result.returncode == 0
    data = json.loads(result.stdout)
    assert data["q2_dominance"]["holds_everywhere"] is True
    assert (tmp_path / "coupled_deprived.csv").exists()
    assert (tmp_path / "coupled_equivalent.csv").exists()


def test_harvest_pmf_csv(tmp_path):
    out = tmp_path / "pmf.csv"
    result = invoke("harvest-pmf", "--theta", "0.667", "--kmax", "12",
                    "--arrivals", "20000", "--seed", "3", "--out", str(out))
    assert result.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,pmf_analytic,pmf_empirical,abs_error"
    assert len(lines) == 13
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(0.51325, abs=1e-4)
    assert float(first[3]) < 0.02


def test_harvest_pmf_estimate_ph12():
    result = invoke("harvest-pmf", "--seed", "4", "--estimate-ph12", "20000",
                    "--loopback-c", "0.5")
    assert result.returncode == 0
    data = json.loads(result.stdout)
    assert 0.0 < data["p_h12"] <= 1.0
    assert data["stderr"] < 0.01


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("q1 = 0.4\nq2 = 0.9\np_h1 = 0.6\n")
    result = invoke("battery", "--config", str(cfg), "--q2", "0.4")
    data = json.loads(result.stdout)
    # the flag overrides q2 = 0.9 from the file
    assert data["closed_form"] == pytest.approx(0.48387, abs=1e-5)


def test_unknown_config_key_is_hard_error(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("transmit_power = 3\n")
    result = invoke("battery", "--config", str(cfg))
    assert result.returncode == 1
    assert "unknown key" in result.stderr


def test_validate_passes_with_defaults():
    result = invoke("validate")
    assert result.returncode == 0
    assert "overall" in result.stdout
    assert "FAIL" not in result.stdout
