import json
from pathlib import Path

import numpy as np
import pytest

from recollide import runner
from recollide.errors import ConfigError, ConvergenceError

TINY = """
[field]
e0 = 0.065
wavelength_nm = 800.0
n_cycles = 2

[molecular.grid]
n_points = 6144

[grids]
n_e = 16
n_par = 32
n_perp = 12

[scenario]
name = "{name}"
{extra}

[output]
dir = "{out}"
"""


def write_cfg(tmp_path, name, extra="", fname="run.toml"):
    path = tmp_path / fname
    path.write_text(TINY.format(name=name, extra=extra, out=tmp_path / "out"))
    return path


class TestConfigValidation:
    def test_missing_file(self):
        with pytest.raises(ConfigError):
            runner.load_config("/nonexistent/path.toml")

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[bogus]\nx = 1\n[scenario]\nname = 'pump_dump'\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            runner.load_config(p)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[field]\nnot_a_key = 1\n[scenario]\nname = 'pump_dump'\n")
        with pytest.raises(ConfigError, match="unknown config key"):
            runner.load_config(p)

    def test_missing_scenario(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[field]\ne0 = 0.065\n")
        with pytest.raises(ConfigError, match="scenario"):
            runner.load_config(p)

    def test_unknown_scenario(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[scenario]\nname = 'warp_drive'\n")
        with pytest.raises(ConfigError, match="unknown scenario"):
            runner.load_config(p)

    def test_negative_field(self, tmp_path):
        p = write_cfg(tmp_path, "pump_dump")
        cfg = runner.load_config(p)
        cfg["field"]["e0"] = -1.0
        with pytest.raises(ConfigError):
            runner.build_field(cfg)

    def test_bad_mode(self, tmp_path):
        p = write_cfg(tmp_path, "pump_dump")
        cfg = runner.load_config(p)
        cfg["field"]["mode"] = "tricolor"
        with pytest.raises(ConfigError):
            runner.build_field(cfg)

    def test_toml_parse_error_is_config_error(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[field\ne0 = ")
        with pytest.raises(ConfigError, match="parse error"):
            runner.load_config(p)

    def test_empty_wavelengths(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "pump_dump", extra="wavelengths_nm = []")
        cfg = runner.load_config(p)
        writer = runner.OutputWriter(tmp_path / "o", cfg)
        with pytest.raises(ConfigError, match="non-empty"):
            runner.run_pump_dump(cfg, writer, molecular, model)

    def test_cli_exit_code_2(self, tmp_path, capsys):
        p = tmp_path / "bad.toml"
        p.write_text("[scenario]\nname = 'warp_drive'\n")
        code = runner.main(["pump_dump", "--config", str(p)])
        assert code == 2

    def test_cli_scenario_mismatch(self, tmp_path):
        p = write_cfg(tmp_path, "pump_dump", extra="wavelengths_nm = [800.0]")
        code = runner.main(["bichromatic", "--config", str(p)])
        assert code == 2


class TestScenarioRuns:
    def test_pump_dump_outputs(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "pump_dump",
                      extra="wavelengths_nm = [800.0, 1850.0]")
        cfg = runner.load_config(p)
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        summary = runner.run_pump_dump(cfg, writer, molecular, model)
        assert (tmp_path / "out" / "pump_dump_800nm.csv").exists()
        assert (tmp_path / "out" / "pump_dump_peaks.csv").exists()
        peaks = [p_["peak_e_d_ev"] for p_ in summary["peaks"]]
        assert peaks[0] > peaks[1]
        header = (tmp_path / "out" / "pump_dump_800nm.csv").read_text()
        assert header.startswith("# config_hash:")
        assert "E_D_eV" in header

    def test_bichromatic_outputs(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "bichromatic", extra="n_phi = 16")
        cfg = runner.load_config(p)
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        summary = runner.run_bichromatic(cfg, writer, molecular, model)
        assert summary["fit"]["r2"] > 0.95
        data = np.loadtxt(tmp_path / "out" / "bichromatic_scan.csv",
                          delimiter=",", comments="#")
        assert data.shape == (16, 3)
        # periodicity: the scan is a pure cosine; fitting reproduces values
        fit = summary["fit"]
        recon = fit["a"] + fit["b"] * np.cos(data[:, 0] + fit["phi0"])
        np.testing.assert_allclose(recon, data[:, 1], rtol=1e-8)

    def test_two_color_degenerate_beat(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "two_color",
                      extra="n_phi = 8\nn_cycles_many = 3")
        cfg = runner.load_config(p)
        cfg["field"]["delta_omega"] = 0.0
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        runner.run_two_color(cfg, writer, molecular, model)
        data = np.loadtxt(tmp_path / "out" / "two_color_scan.csv",
                          delimiter=",", comments="#")
        # delta_omega = 0 makes the two-color run identical to monochromatic
        np.testing.assert_allclose(data[:, 2], data[:, 1], rtol=1e-9)

    def test_field_free_outputs(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "field_free",
                      extra="tau_d_fs = [2.0]\nn_phi = 8")
        cfg = runner.load_config(p)
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        summary = runner.run_field_free(cfg, writer, molecular, model)
        assert summary["scan"]["pearson_r"] > 0.8
        assert (tmp_path / "out" / "field_free_tau_2p00fs.csv").exists()

    def test_coincidence_outputs(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "coincidence",
                      extra="e_d_slice_ev = 6.0\nk_max = 1.1\nn_side = 41")
        cfg = runner.load_config(p)
        cfg["field"]["n_cycles"] = 3
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        summary = runner.run_coincidence(cfg, writer, molecular, model)
        assert (tmp_path / "out" / "coincidence_ring_map.csv").exists()
        assert (tmp_path / "out" / "coincidence_energy_map.csv").exists()
        assert summary["n_cycles"] == 3

    def test_convergence_exit(self, tmp_path, molecular):
        from recollide import impact as imp
        p = write_cfg(tmp_path, "pump_dump",
                      extra="wavelengths_nm = [800.0]")
        cfg = runner.load_config(p)
        cfg.setdefault("run", {})["convergence_tol"] = 1e-9
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        with pytest.raises(ConvergenceError):
            runner.run_pump_dump(cfg, writer, molecular,
                                 imp.ImpactModel(j_max=3))


class TestReproducibility:
    def test_identical_configs_identical_bytes(self, tmp_path, molecular,
                                               model):
        outs = []
        for tag in ("a", "b"):
            p = write_cfg(tmp_path, "bichromatic", extra="n_phi = 8",
                          fname=f"{tag}.toml")
            cfg = runner.load_config(p)
            out = tmp_path / f"out_{tag}"
            writer = runner.OutputWriter(out, cfg)
            runner.run_bichromatic(cfg, writer, molecular, model)
            outs.append(out)
        for name in ("bichromatic_scan.csv", "bichromatic_spectra.csv"):
            b1 = (outs[0] / name).read_bytes()
            b2 = (outs[1] / name).read_bytes()
            assert b1 == b2

    def test_thread_count_independent(self, tmp_path, molecular, model):
        outs = []
        for tag, threads in (("t1", 1), ("t2", 3)):
            p = write_cfg(tmp_path, "bichromatic", extra="n_phi = 8",
                          fname=f"{tag}.toml")
            cfg = runner.load_config(p)
            cfg.setdefault("run", {})["threads"] = threads
            out = tmp_path / f"out_{tag}"
            writer = runner.OutputWriter(out, cfg)
            runner.run_bichromatic(cfg, writer, molecular, model)
            outs.append(out)
        b1 = (outs[0] / "bichromatic_scan.csv").read_bytes()
        b2 = (outs[1] / "bichromatic_scan.csv").read_bytes()
        assert b1 == b2


class TestTrajectoryDump:
    def test_dump_file(self, tmp_path, molecular, model):
        p = write_cfg(tmp_path, "pump_dump",
                      extra="wavelengths_nm = [800.0]")
        cfg = runner.load_config(p)
        writer = runner.OutputWriter(tmp_path / "out", cfg)
        runner.dump_trajectories(cfg, writer, molecular, model)
        data = np.loadtxt(tmp_path / "out" / "trajectories.csv",
                          delimiter=",", comments="#")
        assert data.shape[1] == 8
        assert data.shape[0] > 0
        assert np.all(data[:, 2] < data[:, 3])  # birth precedes return
