import json

import numpy as np
import pytest

from msts.cli import ConfigError, SimConfig, crow_config, main, simulate
from msts.crow import silicon_crow


def two_mode_config(**integration):
    integ = {"t_end": 5.0, "n_samples": 11}
    integ.update(integration)
    return {
        "structure": {"modes": [{"omega": 1.0, "gamma": 0.02}, {"omega": 1.0, "gamma": 0.03}]},
        "coupling": {"matrix": [[0.0, 0.05], [0.05, 0.0]]},
        "pump": {"kind": "cw", "omega_p": 1.0, "alpha_sq": 1.0},
        "integration": integ,
        "observables": {"pairs": [[1, 2]], "sign": "both"},
    }


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_run_writes_csv_and_summary(tmp_path):
    cfg = write(tmp_path / "c.json", two_mode_config())
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "out"), "--quiet"]) == 0
    lines = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:3] == ["t", "r_1", "r_2"]
    assert "Delta2_1_2_plus" in header and "Delta2_1_2_minus" in header
    assert len(lines) == 12
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["max_scaled_trace_residual"] < 1e-10
    assert summary["min_uncertainty_eigenvalue"] > -1e-8


def test_run_is_byte_identical(tmp_path):
    cfg = write(tmp_path / "c.json", two_mode_config())
    main(["run", "--config", cfg, "--out", str(tmp_path / "a"), "--quiet"])
    main(["run", "--config", cfg, "--out", str(tmp_path / "b"), "--quiet"])
    for name in ("trajectory.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_json_format(tmp_path):
    cfg = write(tmp_path / "c.json", two_mode_config())
    assert main(["run", "--config", cfg, "--out", str(tmp_path), "--format", "json", "--quiet"]) == 0
    data = json.loads((tmp_path / "trajectory.json").read_text())
    assert len(data["t"]) == 11


def test_config_errors_name_the_field(tmp_path, capsys):
    bad = two_mode_config()
    del bad["pump"]
    assert main(["run", "--config", write(tmp_path / "a.json", bad), "--quiet"]) == 2
    assert "$.pump: missing required field" in capsys.readouterr().err

    bad = two_mode_config()
    bad["coupling"]["matrix"] = [[0.0, 0.05], [0.01, 0.0]]
    assert main(["run", "--config", write(tmp_path / "b.json", bad), "--quiet"]) == 2
    assert "$.coupling" in capsys.readouterr().err

    bad = two_mode_config()
    bad["observables"]["pairs"] = [[1, 1]]
    assert main(["run", "--config", write(tmp_path / "c.json", bad), "--quiet"]) == 2

    (tmp_path / "d.json").write_text("{not json")
    assert main(["run", "--config", str(tmp_path / "d.json"), "--quiet"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--quiet"]) == 2


def test_config_validation_in_python():
    with pytest.raises(ConfigError) as info:
        SimConfig.from_dict({**two_mode_config(), "extra": 1})
    assert info.value.path == "$"
    bad = two_mode_config(t_end=-1.0)
    with pytest.raises(ConfigError):
        SimConfig.from_dict(bad)


def test_integration_failure_exit_code(tmp_path, capsys):
    cfg = two_mode_config(t_end=1e4)
    cfg["structure"]["modes"] = [{"omega": 1.0, "gamma": 0.0}, {"omega": 1.0, "gamma": 0.0}]
    cfg["coupling"]["matrix"] = [[0.0, 50.0], [50.0, 0.0]]
    with np.errstate(all="ignore"):
        code = main(["run", "--config", write(tmp_path / "c.json", cfg), "--quiet"])
    assert code == 3
    assert "integration failed" in capsys.readouterr().err


def test_lossless_summary_check(tmp_path):
    cfg = two_mode_config()
    cfg["structure"]["modes"] = [{"omega": 1.0, "gamma": 0.0}, {"omega": 1.0, "gamma": 0.0}]
    cols, summary = simulate(SimConfig.from_dict(cfg))
    assert summary["checks"]["resonant"] and summary["checks"]["pass"]


def test_takagi_default(tmp_path):
    out = tmp_path / "t.json"
    assert main(["takagi", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["pass"] and report["reconstruction_error"] < 1e-12


def test_takagi_from_config(tmp_path):
    cfg = write(tmp_path / "c.json", two_mode_config())
    out = tmp_path / "t.json"
    assert main(["takagi", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["lambda_abs"] == pytest.approx([0.05, 0.05])


def test_crow_gen_round_trip(tmp_path):
    cfg_path = tmp_path / "crow.json"
    assert main(["crow-gen", "--t-end", "4", "--out", str(cfg_path)]) == 0
    assert json.loads(cfg_path.read_text()) == crow_config(silicon_crow(), t_end=4.0).to_dict()
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "run"), "--quiet"]) == 0
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["modes"] == 4 and summary["time_unit"] == "t_c"
    assert summary["max_scaled_trace_residual"] < 1e-8


def test_oracle_compare_one_mode(tmp_path):
    out = tmp_path / "o.json"
    assert main(["oracle-compare", "--modes", "1", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["pass"] and not report["cutoff_saturation"]


def test_oracle_compare_flags_small_cutoff(tmp_path):
    out = tmp_path / "o.json"
    assert main(["oracle-compare", "--modes", "1", "--cutoff", "3", "--out", str(out)]) == 1
    assert json.loads(out.read_text())["cutoff_saturation"]


def test_limits_check(tmp_path):
    out = tmp_path / "l.json"
    assert main(["limits-check", "--states", "200", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"]


def test_sweep_runs_every_config(tmp_path, monkeypatch):
    monkeypatch.setenv("MSTS_THREADS", "1")
    a = write(tmp_path / "a.json", two_mode_config())
    b = write(tmp_path / "b.json", two_mode_config(t_end=3.0))
    assert main(["run", "--config", a, "--config", b, "--out", str(tmp_path / "sweep"), "--quiet"]) == 0
    assert (tmp_path / "sweep" / "a" / "trajectory.csv").exists()
    assert (tmp_path / "sweep" / "b" / "trajectory.csv").exists()
