"""CLI surface: run/analyze/sweep exit codes, outputs, determinism."""
from pathlib import Path

import pytest

from thermoflux.cli import main

CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"

IG_CONFIG = """
[model]
kind = ideal-gas
kappa1 = 1.0
kappa2 = 1.0
dtilde = 1.0

[grid]
n = 32

[initial]
rho0 = 1.0
theta0 = 1.0
rho_amplitude = 0.1
theta_amplitude = 0.1

[solver]
t_end = 0.02
stride = 5

[output]
directory = {out}
"""


def write_config(tmp_path, name="run.cfg", **kw):
    out = kw.pop("out", tmp_path / "out")
    path = tmp_path / name
    path.write_text(IG_CONFIG.format(out=out))
    return path, out


def test_run_completes_and_csv_starts_at_zero(tmp_path):
    cfg, out = write_config(tmp_path)
    assert main(["run", str(cfg)]) == 0
    lines = (out / "diagnostics.csv").read_text().splitlines()
    assert lines[0].startswith("t,mass,")
    assert float(lines[1].split(",")[0]) == 0.0
    assert (out / "status.txt").read_text().strip() == "completed"


@pytest.mark.parametrize("fixture", ["ideal_gas.cfg", "porous_media_low_density.cfg",
                                     "generalized_pm.cfg"])
def test_shipped_fixtures_run_clean(tmp_path, monkeypatch, fixture):
    monkeypatch.setenv("THERMOFLUX_OUTPUT_DIR", str(tmp_path / "out"))
    assert main(["run", str(CONFIGS_DIR / fixture)]) == 0
    lines = (tmp_path / "out" / "diagnostics.csv").read_text().splitlines()
    assert float(lines[1].split(",")[0]) == 0.0


def test_run_rejects_bad_config(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[model]\nkind = nonsense\n")
    assert main(["run", str(path)]) == 1


def test_run_maps_numerical_abort_to_exit_2(tmp_path, monkeypatch):
    import thermoflux.cli as cli_mod
    cfg, _ = write_config(tmp_path)
    monkeypatch.setattr(cli_mod, "_execute_run", lambda c, o: "aborted-nonpositive-rho")
    assert main(["run", str(cfg)]) == 2


def test_run_missing_file_is_usage_error(tmp_path):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 1


def test_repeated_runs_identical_bytes(tmp_path):
    cfg_a, out_a = write_config(tmp_path, "a.cfg", out=tmp_path / "out_a")
    cfg_b, out_b = write_config(tmp_path, "b.cfg", out=tmp_path / "out_b")
    assert main(["run", str(cfg_a)]) == 0
    assert main(["run", str(cfg_b)]) == 0
    assert (out_a / "diagnostics.csv").read_bytes() == (out_b / "diagnostics.csv").read_bytes()


def test_output_dir_env_override(tmp_path, monkeypatch):
    cfg, out = write_config(tmp_path)
    override = tmp_path / "elsewhere"
    monkeypatch.setenv("THERMOFLUX_OUTPUT_DIR", str(override))
    assert main(["run", str(cfg)]) == 0
    assert (override / "diagnostics.csv").exists()
    assert not out.exists()


def test_snapshots_written_when_enabled(tmp_path):
    out = tmp_path / "snap_out"
    path = tmp_path / "snap.cfg"
    path.write_text(IG_CONFIG.format(out=out) + "snapshots = true\n")
    assert main(["run", str(path)]) == 0
    assert (out / "rho_000000.f64").exists()
    assert (out / "rho_000000.meta").exists()


def test_analyze_ideal_gas_matches_library(tmp_path, capsys):
    from thermoflux import gamma_exponents
    assert main(["analyze", "--model", "ideal-gas",
                 "--kappa1", "1", "--kappa2", "1", "--dtilde", "1"]) == 0
    text = capsys.readouterr().out
    report = dict(line.split(" = ") for line in text.strip().splitlines())
    e = gamma_exponents(1.0, 1.0, 1.0)
    assert float(report["gamma_plus"]) == pytest.approx(e.gamma_plus, abs=1e-15)
    assert float(report["gamma_minus"]) == pytest.approx(e.gamma_minus, abs=1e-15)
    assert float(report["c_plus"]) < 0 < float(report["c_minus"])


def test_analyze_porous_media_writes_scan_csvs(tmp_path, capsys):
    out = tmp_path / "analysis"
    assert main(["analyze", "--model", "porous-media", "--kappa1", "1",
                 "--kappa2", "1", "--d", "1", "--alpha", "2",
                 "--rho-min", "1e-3", "--rho-max", "1e3", "--points", "40",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    report = dict(line.split(" = ") for line in text.strip().splitlines()
                  if " = " in line)
    assert float(report["rho_bar"]) == pytest.approx(1.1692837079926507, rel=1e-6)
    for branch in ("plus", "minus"):
        lines = (out / f"branch_{branch}.csv").read_text().splitlines()
        assert lines[0] == "rho,f,psi,gtilde"
        assert len(lines) == 41


def test_analyze_missing_flag_is_usage_error(capsys):
    assert main(["analyze", "--model", "ideal-gas", "--kappa1", "1", "--kappa2", "1"]) == 1


def test_analyze_scan_without_sign_change_is_reported(tmp_path, capsys):
    # Gt_plus is single-signed on [10, 100] for these constants
    code = main(["analyze", "--model", "porous-media", "--kappa1", "1",
                 "--kappa2", "1", "--d", "1", "--alpha", "2",
                 "--rho-min", "10", "--rho-max", "100", "--points", "10",
                 "--out", str(tmp_path)])
    assert code == 1
    assert "no sign change" in capsys.readouterr().err


def test_sweep_produces_subdirectories(tmp_path):
    cfg, out = write_config(tmp_path, "sweep.cfg", out=tmp_path / "sweep_out")
    assert main(["sweep", str(cfg), "--vary", "model.dtilde=0.5,1,2", "--jobs", "1"]) == 0
    subdirs = sorted(p.name for p in (tmp_path / "sweep_out").iterdir())
    assert subdirs == ["model.dtilde=0.5", "model.dtilde=1", "model.dtilde=2"]
    csvs = [(tmp_path / "sweep_out" / d / "diagnostics.csv").read_bytes() for d in subdirs]
    assert len({c for c in csvs}) == 3  # independent results


def test_sweep_cartesian_product(tmp_path):
    cfg, out = write_config(tmp_path, "sweep2.cfg", out=tmp_path / "sw2")
    assert main(["sweep", str(cfg), "--vary", "model.dtilde=1,2",
                 "--vary", "initial.rho_amplitude=0.05,0.1", "--jobs", "2"]) == 0
    assert len(list((tmp_path / "sw2").iterdir())) == 4


def test_sweep_bad_vary_syntax(tmp_path):
    cfg, _ = write_config(tmp_path, "s.cfg")
    assert main(["sweep", str(cfg), "--vary", "dtilde=1,2"]) == 1
