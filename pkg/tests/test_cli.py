import json

import numpy as np
import pytest

from mixedfield.cli import ConfigError, load_config, main

FAST = """
[fields]
e_max_vcm = 300
beta_deg = {beta}
i0_wcm2 = 1e10
fwhm_ns = 0.01
ramp_ns = 0.05

[numerics]
j_max = 8
dt_pulse_ps = 0.05

[thermal]
temperatures_k = 0.1:0.4:0.1
j_cut = 2
max_deficit = 1e-2

[project]
label = 1,1,e

[adiabatic]
points = 5
j_levels = 2

[mixture]
states = 0,0,e:0.92; 1,1,e:0.04; 1,1,o:0.04
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(FAST.format(beta=30))
    return path


def read_dir(out, command):
    (d,) = [p for p in out.iterdir() if p.name.startswith(command)]
    return d


def test_parse_ranges_and_matrix(config):
    cfg = load_config(config)
    assert cfg.temperatures == [0.1, 0.2, 0.3, 0.4]
    assert len(cfg.fields) == 1
    assert cfg.j_max == 8
    cfg2 = load_config(config, overrides={"fields": {"i0_wcm2": "1e10, 2e10", "beta_deg": "0, 30"}})
    assert len(cfg2.fields) == 4


@pytest.mark.parametrize(
    "section,key,value",
    [("fields", "e_max_vcm", "-1"), ("numerics", "j_max", "zero"), ("thermal", "temperatures_k", "1:0:0.1"),
     ("mixture", "states", "0,0,e:0.5"), ("imaging", "probes", "diagonal"), ("fields", "tstart_tau", "0.5")],
)
def test_invalid_configs(config, section, key, value):
    with pytest.raises(ConfigError):
        load_config(config, overrides={section: {key: value}})


def test_missing_config_file(tmp_path, capsys):
    assert main(["weights", "-c", str(tmp_path / "nope.ini"), "-o", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_weights_command(tmp_path):
    assert main(["weights", "-o", str(tmp_path)]) == 0
    d = read_dir(tmp_path, "weights")
    rows = np.loadtxt(d / "weights.csv", delimiter=",", skiprows=1)
    at = rows[np.isclose(rows[:, 0], 0.5)]
    assert at[0, 2] == pytest.approx(0.478, abs=0.002)
    assert json.loads((d / "summary.json").read_text())["converged"]


def test_state_table_and_reproducibility(tmp_path, config):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["state-table", "-c", str(config), "-o", str(out_a)]) == 0
    assert main(["state-table", "-c", str(config), "-o", str(out_b), "-w", "2"]) == 0
    da, db = read_dir(out_a, "state-table"), read_dir(out_b, "state-table")
    assert da.name == db.name
    assert (da / "states.csv").read_bytes() == (db / "states.csv").read_bytes()
    header = (da / "states.csv").read_text().splitlines()[0].split(",")
    assert header[:5] == ["J", "absM", "parity", "cos_theta", "cos2_theta"]
    assert "top5_pop" in header
    summary = json.loads((da / "summary.json").read_text())
    assert summary["converged"] and summary["diagnostics"]["max_norm_drift"] < 1e-8
    assert json.loads((da / "config.json").read_text())["run"]["j_max"] == 8


def test_thermal_sweep_uses_cache(tmp_path, config):
    assert main(["thermal-sweep", "-c", str(config), "-o", str(tmp_path)]) == 0
    d = read_dir(tmp_path, "thermal-sweep")
    first = (d / "thermal.csv").read_bytes()
    cached = list((tmp_path / "cache").rglob("*.npz"))
    assert len(cached) == 9
    mtimes = {p: p.stat().st_mtime_ns for p in cached}
    assert main(["thermal-sweep", "-c", str(config), "-o", str(tmp_path)]) == 0
    assert (d / "thermal.csv").read_bytes() == first
    assert all(p.stat().st_mtime_ns == t for p, t in mtimes.items())
    summary = json.loads((d / "summary.json").read_text())
    assert set(summary["mixture"]) == {"cos_theta", "ratio_vertical", "ratio_perpendicular", "ratio_circular"}
    assert summary["thermal"]["T_K"] == ["0.1", "0.2", "0.3", "0.4"]


def test_project_and_adiabatic_map(tmp_path, config):
    assert main(["project", "-c", str(config), "-o", str(tmp_path)]) == 0
    d = read_dir(tmp_path, "project")
    data = np.loadtxt(d / "projection.csv", delimiter=",", skiprows=1)
    assert data.shape[0] == 5
    assert np.all(np.diff(data[:, 1]) > 0)
    assert (d / "trajectory.csv").exists()
    assert main(["adiabatic-map", "-c", str(config), "-o", str(tmp_path)]) == 0
    d = read_dir(tmp_path, "adiabatic-map")
    header = (d / "adiabatic.csv").read_text().splitlines()[0]
    assert header.startswith("I_Wcm2,E_cm1_00e,cos_00e")


def test_mixture_command(tmp_path, config):
    assert main(["mixture", "-c", str(config), "-o", str(tmp_path)]) == 0
    summary = json.loads((read_dir(tmp_path, "mixture") / "summary.json").read_text())
    assert 0 <= summary["mixture"]["ratio_vertical"] <= 1


def test_unconverged_exit_code(tmp_path, config):
    bad = config.parent / "bad.ini"
    bad.write_text(FAST.format(beta=30) + "\n[states]\nlabels = 1,0,e\n")
    cfg_text = bad.read_text().replace("dt_pulse_ps = 0.05", "dt_pulse_ps = 0.05\nnorm_tol = 0")
    bad.write_text(cfg_text)
    assert main(["state-table", "-c", str(bad), "-o", str(tmp_path)]) == 1
