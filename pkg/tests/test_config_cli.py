import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from presymspin import cli
from presymspin.config import ConfigError, RunConfig, to_json

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_defaults_round_trip():
    for command in cli.COMMANDS:
        cfg = RunConfig.defaults(command)
        text = cfg.canonical()
        again = RunConfig.from_text(text, command)
        assert again.canonical() == text
        assert again.data == cfg.data


def test_awkward_numbers_round_trip():
    cfg = RunConfig.from_text("[model]\ng = 2.00231930436256\nm = 0.1\n[field]\nkappa = 1e-300\n"
                              "[experiment]\neps_list = 0.1 0.3 1e-17\n")
    again = RunConfig.from_text(cfg.canonical())
    assert again.data == cfg.data
    assert again["model"]["g"] == 2.00231930436256
    assert again["experiment"]["eps_list"] == [0.1, 0.3, 1e-17]


def test_config_errors():
    with pytest.raises(ConfigError, match="unknown section"):
        RunConfig.from_text("[nope]\na = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        RunConfig.from_text("[model]\nmass = 1\n")
    with pytest.raises(ConfigError, match="three numbers"):
        RunConfig.from_text("[state]\nr = 1 2\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        RunConfig.from_text("[model]\nm = heavy\n")


def test_builders():
    cfg = RunConfig.from_text("[model]\npreset = custom\nk = -0.2\nl = -0.8\n")
    c = cfg.coefficients()
    assert (c.k, c.l, c.preset) == (-0.2, -0.8, "custom")
    assert cfg.coefficients("souriau").k == -1.0
    assert cfg.two_form_model("free").variant == "free"
    p = cfg.start_point()
    assert abs(p.X[0] - 1.0) < 1e-15


def test_table_path_is_relative_to_config():
    cfg = RunConfig.load(CONFIGS / "audit_tabulated.ini", "audit")
    assert Path(cfg["field"]["table_path"]).is_file()
    assert cfg.field_model().profile.name == "tabulated"


def test_json_serializer():
    text = to_json({"a": 0.1, "b": [1, 2.5], "c": float("nan"), "d": True, "e": "x", "f": np.float64(1 / 3)})
    data = json.loads(text)
    assert data["a"] == 0.1 and data["c"] is None and data["d"] is True
    assert "0.33333333333333331" in text


def run_cli(args, tmp_path):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_audit_default_and_free(tmp_path):
    assert run_cli(["audit", "--config", str(CONFIGS / "audit_coulomb.ini")], tmp_path / "a") == 0
    summary = json.loads((tmp_path / "a" / "audit_summary.json").read_text())
    assert summary["rank_min"] == summary["rank_max"] == 8
    assert summary["closedness_max"] < 1e-5
    assert run_cli(["audit", "--config", str(CONFIGS / "audit_free.ini")], tmp_path / "b") == 0
    summary = json.loads((tmp_path / "b" / "audit_summary.json").read_text())
    assert summary["closedness_max"] < 1e-8


def test_audit_negative_controls(tmp_path):
    assert run_cli(["audit", "--config", str(CONFIGS / "audit_corrupted_table.ini")], tmp_path / "a") == 1
    cfg = tmp_path / "linear.ini"
    cfg.write_text("[field]\nkind = linear\nslope_scale = 1\n[experiment]\nn_points = 3\n")
    assert run_cli(["audit", "--config", str(cfg)], tmp_path / "b") == 1


def test_bmt_requires_uniform_field(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[field]\nkind = central_electric\n")
    assert run_cli(["bmt", "--config", str(cfg)], tmp_path) == 4
    assert "uniform field" in capsys.readouterr().err


def test_conserve_integrator_failure(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[field]\nkappa = 5\n[integration]\nh = 3\nn_steps = 5\n")
    assert run_cli(["conserve", "--config", str(cfg)], tmp_path) == 2
    assert "reduce [integration] h" in capsys.readouterr().err


def test_conserve_drift_bound(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[integration]\nn_steps = 50\n[experiment]\ndrift_bound = 1e-300\n")
    assert run_cli(["conserve", "--config", str(cfg)], tmp_path) == 1


def test_spinorbit_fit_failure(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nfamily_size = 2\n")
    assert run_cli(["spinorbit", "--config", str(cfg)], tmp_path) == 3


def test_bad_arguments_exit_4():
    with pytest.raises(SystemExit) as exc:
        cli.main(["audit", "--format", "xml"])
    assert exc.value.code == 4


def _short_conserve(tmp_path):
    cfg = tmp_path / "short.ini"
    cfg.write_text((CONFIGS / "conserve_coulomb.ini").read_text().replace("n_steps = 10000", "n_steps = 100"))
    return cfg


def test_trajectory_csv_schema(tmp_path):
    assert run_cli(["conserve", "--config", str(_short_conserve(tmp_path))], tmp_path / "o") == 0
    lines = (tmp_path / "o" / "conserve_trajectory.csv").read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == cli.TRAJECTORY_HEADER
    assert len(body) == 102
    row = [float(v) for v in body[5].split(",")]
    assert len(row) == 24
    # every number is written with enough digits to round-trip
    for text in body[5].split(","):
        assert float(text) == float(format(float(text), ".17g"))
    echo = "\n".join(ln[2:] if ln.startswith("# ") else "" for ln in lines if ln.startswith("#"))
    assert RunConfig.from_text(echo).canonical() == RunConfig.from_text(echo).canonical()
    assert "n_steps = 100" in echo


def test_cli_outputs_are_byte_identical(tmp_path):
    cfg = _short_conserve(tmp_path)
    out = tmp_path / "o"
    runs = []
    for _ in range(2):
        assert run_cli(["conserve", "--config", str(cfg), "--seed", "7"], out) == 0
        assert run_cli(["spinorbit", "--seed", "7", "--format", "json"], out) == 0
        assert run_cli(["audit", "--seed", "7"], out) == 0
        runs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert len(runs[0]) == 7
    assert runs[0] == runs[1]


def test_json_table_format(tmp_path):
    assert run_cli(["spinorbit", "--format", "json"], tmp_path) == 0
    rows = json.loads((tmp_path / "spinorbit_table.json").read_text())["rows"]
    assert {r["preset"] for r in rows} == {"stora", "souriau"}
    summary = json.loads((tmp_path / "spinorbit_summary.json").read_text())
    assert summary["config.output.format"] == "json"
    assert abs(summary["stora.c"] + 0.5) < 0.005


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "presymspin", "spinorbit", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "spinorbit PASS" in proc.stdout
