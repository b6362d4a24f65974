"""Configuration and CLI tests: parsing, exit codes, determinism, sweeps."""

import math

import numpy as np
import pytest

from deitsim.cli import main
from deitsim.config import load_config
from deitsim.errors import ConfigError
from deitsim import runs

TWO_PI = 2.0 * math.pi


def test_unit_parsing(tmp_path):
    cfg_file = tmp_path / "o.cfg"
    cfg_file.write_text(
        "[atom]\nmagnetic_field = 0.015 T\nlinewidth = 5730 kHz\ndensity = 1e14 cm^-3\n"
        "[geometry]\nlength = 1600 um\n"
        "[run]\nt_end = 2000 ns\n"
    )
    cfg = load_config(cfg_file)
    assert cfg.get("atom", "magnetic_field") == pytest.approx(150.0)
    assert cfg.get("atom", "linewidth") == pytest.approx(TWO_PI * 5.73e6)
    assert cfg.get("atom", "density") == pytest.approx(1e20)
    assert cfg.get("geometry", "length") == pytest.approx(1.6e-3)
    assert cfg.get("run", "t_end") == pytest.approx(2e-6)


def test_missing_unit_rejected(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[atom]\nmagnetic_field = 150\n")
    with pytest.raises(ConfigError, match="unit"):
        load_config(bad)


def test_unknown_key_rejected(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[atom]\nmagnetic_feld = 150 G\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(bad)


def test_layering_overrides(tmp_path):
    override = tmp_path / "override.cfg"
    override.write_text("[atom]\nmagnetic_field = 75 G\n")
    cfg = load_config(override, preset="fig2")
    assert cfg.get("atom", "magnetic_field") == pytest.approx(75.0)
    assert cfg.get("atom", "density") == pytest.approx(1e20)  # from the preset


def test_level_parsing_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[levels]\nstate_1 = 5S1/2 F=1\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        load_config(preset="nope")


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", "--preset", "fig2"]) == 0
    # a perturbativity warning still exits 0
    strong = tmp_path / "strong.cfg"
    strong.write_text("[lasers]\nrabi_1 = 4.06 MHz\n")
    assert main(["validate", "--preset", "fig2", "--config", str(strong)]) == 0
    out = capsys.readouterr().out
    assert "not perturbative" in out
    # B = 0 collapses the 3-5 detuning: Kerr singularity is an error
    zero = tmp_path / "zero.cfg"
    zero.write_text("[atom]\nmagnetic_field = 0 G\n")
    assert main(["validate", "--preset", "fig2", "--config", str(zero)]) == 1
    assert "singular" in capsys.readouterr().out


def test_dump_structure_csv(tmp_path):
    assert main(["dump-structure", "--preset", "fig2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "structure.csv").read_text().splitlines()
    rows = [line for line in lines if not line.startswith("#")]
    assert rows[0] == "manifold,F,mF,B_G,energy_MHz"
    assert len(rows) == 17  # header + 16 states
    assert any(line.startswith("# atom.magnetic_field") for line in lines)


def test_run_is_deterministic(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--preset", "phase-shift", "--out", str(out_a)]) == 0
    assert main(["run", "--preset", "phase-shift", "--out", str(out_b)]) == 0
    for name in ("cross_dipole.csv", "summary.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_custom_single_point(tmp_path):
    single = tmp_path / "single.cfg"
    single.write_text("")  # preset supplies everything
    out = tmp_path / "out"
    code = main(
        ["run", "--preset", "fig2", "--config", str(single), "--out", str(out)]
    )
    # fig2 drives the fig2 runner; use custom explicitly for diagnostics
    assert code == 0


def test_custom_sweep_over_field(tmp_path):
    sweep = tmp_path / "sweep.cfg"
    sweep.write_text(
        "[sweep]\nparameter = atom.magnetic_field\nvalues = 25, 75, 150\nunit = G\n"
    )
    cfg = load_config(sweep, preset="fig2")
    table = runs.run_custom(cfg, workers=2)
    mismatches = [abs(row["mismatch_MHz"]) for row in table["rows"]]
    assert all(a < b for a, b in zip(mismatches, mismatches[1:]))  # monotone in B
    from deitsim.constants import RB87, GROUND

    d_w = 2.0 * RB87.hyperfine_a[GROUND]
    for value, row in zip((25.0, 75.0, 150.0), table["rows"]):
        x = (RB87.g_j[GROUND] - RB87.g_i) * RB87.mu_b_per_gauss * value / d_w
        oracle = d_w * (1.0 - math.sqrt(1.0 + x * x)) / (TWO_PI * 1e6)
        assert row["mismatch_MHz"] == pytest.approx(oracle, rel=1e-9)
        assert row["sweep_atom.magnetic_field"] == value


def test_custom_sweep_rejects_unknown_parameter(tmp_path):
    sweep = tmp_path / "sweep.cfg"
    sweep.write_text("[sweep]\nparameter = atom.nope\nvalues = 1\nunit = G\n")
    cfg = load_config(sweep, preset="fig2")
    with pytest.raises(ConfigError):
        runs.run_custom(cfg)


def test_estimate_prints_table(capsys):
    assert main(["estimate", "--preset", "max-phase"]) == 0
    out = capsys.readouterr().out
    assert "phi_max_rad" in out and "doppler_window_MHz" in out


def test_cli_config_error_exit_code(tmp_path):
    missing = tmp_path / "missing.cfg"
    assert main(["run", "--config", str(missing), "--preset", "custom"]) == 1


def test_summary_contains_expected_keys(fig2_results):
    rows = runs.summary_rows(fig2_results)
    keys = set(rows[0])
    for tier in ("simple", "perturbative", "master"):
        assert any(k.startswith(tier + ".") for k in keys)
    assert "perturbative.phi1" in keys
    assert "master.settle_time_us" in keys
