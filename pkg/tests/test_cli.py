import json

import numpy as np
import pytest

from singletsim.cli import (
    ConfigError,
    cmd_fit,
    cmd_scan,
    cmd_simulate,
    load_config,
    main,
    read_trace_file,
)
from singletsim.hamiltonian import pair_center_offset, resonant_nutation


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def rabi_config(**extra):
    cfg = {
        "preset": "glutamate",
        "protocol": {
            "kind": "rabi",
            "source_pair": 0,
            "readout_pair": 1,
            "transfer": {"nutation_hz": 599.31, "transmitter_ppm": 2.04},
            "sweep": {"start": 0.02, "stop": 1.5, "count": 60},
        },
    }
    cfg.update(extra)
    return cfg


class TestLoadConfig:
    def test_glutamate_preset_resolves_shifts(self, tmp_path):
        config = load_config(write_config(tmp_path, rabi_config()))
        assert config.system.n_spins == 4
        # pair centers at 2.04 and 2.30 ppm on a 200 MHz instrument
        assert abs(pair_center_offset(config.system, 0) - 408.0) < 1e-9
        assert abs(pair_center_offset(config.system, 1) - 460.0) < 1e-9

    def test_phe_gly_gly_preset_pair_positions(self, tmp_path):
        cfg = rabi_config(preset="phe-gly-gly")
        cfg["protocol"]["transfer"] = {"nutation_hz": 280.0, "transmitter_ppm": 3.89}
        config = load_config(write_config(tmp_path, cfg))
        assert abs(pair_center_offset(config.system, 0) - 3.89 * 200) < 1e-9
        assert abs(pair_center_offset(config.system, 1) - 3.71 * 200) < 1e-9

    def test_ppm_conversion(self, tmp_path):
        config = load_config(write_config(tmp_path, rabi_config()))
        dnu12 = pair_center_offset(config.system, 1) - pair_center_offset(config.system, 0)
        assert abs(dnu12 - 0.26 * 200) < 1e-9  # 52 Hz

    def test_explicit_system_block(self, tmp_path):
        cfg = {
            "system": {
                "spectrometer_mhz": 200.0,
                "spins": [{"shift_ppm": 1.0}, {"offset_hz": 190.0}],
                "couplings_hz": [[0.0, 7.0], [7.0, 0.0]],
                "pairs": [[0, 1]],
            },
            "protocol": {
                "kind": "rabi",
                "transfer": {"nutation_hz": 100.0, "transmitter_offset_hz": 195.0},
                "sweep": {"values": [0.1, 0.2, 0.3]},
            },
        }
        config = load_config(write_config(tmp_path, cfg))
        assert np.allclose(config.system.offsets_hz, [200.0, 190.0])

    def test_missing_couplings_matrix(self, tmp_path):
        cfg = {
            "system": {"spins": [{"shift_ppm": 1.0}], "pairs": []},
            "protocol": {
                "kind": "rabi",
                "transfer": {"nutation_hz": 1.0},
                "sweep": {"values": [0.1]},
            },
        }
        with pytest.raises(ConfigError, match="couplings_hz"):
            load_config(write_config(tmp_path, cfg))

    def test_preset_and_system_mutually_exclusive(self, tmp_path):
        cfg = rabi_config()
        cfg["system"] = {"spins": [], "couplings_hz": []}
        with pytest.raises(ConfigError, match="exactly one"):
            load_config(write_config(tmp_path, cfg))
        with pytest.raises(ConfigError, match="exactly one"):
            load_config(write_config(tmp_path, {"protocol": {}}))

    def test_noise_requires_seed(self, tmp_path):
        cfg = rabi_config(noise={"sigma": 0.01})
        with pytest.raises(ConfigError, match="seed"):
            load_config(write_config(tmp_path, cfg))

    def test_parse_error_reports_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json }")
        with pytest.raises(ConfigError, match="line 1"):
            load_config(path)

    def test_invalid_sweep_named(self, tmp_path):
        cfg = rabi_config()
        cfg["protocol"]["sweep"] = {"values": [0.3, 0.2]}
        with pytest.raises(ConfigError, match="strictly increasing"):
            load_config(write_config(tmp_path, cfg))

    def test_unknown_preset(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown preset"):
            load_config(write_config(tmp_path, rabi_config(preset="caffeine")))


class TestSimulate:
    def test_trace_file_round_trip(self, tmp_path):
        cfg_path = write_config(tmp_path, rabi_config())
        out = cmd_simulate(cfg_path, tmp_path / "run")
        x, y = read_trace_file(out)
        assert x.size == 60
        assert np.all(np.isfinite(y))
        header = out.read_text().splitlines()
        assert header[0].startswith("#")
        assert any("config:" in line for line in header[:5])

    def test_determinism(self, tmp_path):
        cfg_path = write_config(tmp_path, rabi_config(noise={"sigma": 0.02, "seed": 42}))
        a = cmd_simulate(cfg_path, tmp_path / "a").read_bytes()
        b = cmd_simulate(cfg_path, tmp_path / "b").read_bytes()
        assert a == b

    def test_noise_changes_with_seed(self, tmp_path):
        a = cmd_simulate(
            write_config(tmp_path, rabi_config(noise={"sigma": 0.02, "seed": 1}), "c1.json"),
            tmp_path / "n1",
        ).read_bytes()
        b = cmd_simulate(
            write_config(tmp_path, rabi_config(noise={"sigma": 0.02, "seed": 2}), "c2.json"),
            tmp_path / "n2",
        ).read_bytes()
        assert a != b

    def test_single_point_sweep(self, tmp_path):
        cfg = rabi_config()
        cfg["protocol"]["sweep"] = {"values": [0.25]}
        out = cmd_simulate(write_config(tmp_path, cfg), tmp_path / "single")
        x, y = read_trace_file(out)
        assert x.size == 1

    def test_envelope_applied(self, tmp_path):
        cfg = rabi_config(envelope={"t_rabi_s": 1.6})
        out_env = cmd_simulate(write_config(tmp_path, cfg, "env.json"), tmp_path / "env")
        out_raw = cmd_simulate(write_config(tmp_path, rabi_config(), "raw.json"), tmp_path / "raw")
        _, y_env = read_trace_file(out_env)
        _, y_raw = read_trace_file(out_raw)
        assert y_env[-1] < y_raw[-1]


class TestFit:
    def make_synthetic_trace(self, tmp_path, kind="rabi"):
        t = np.linspace(0.01, 3.0, 150)
        if kind == "rabi":
            y = 0.9 * (np.sin(np.pi * 2.57 * t) ** 2 + 0.05) * np.exp(-t / 1.6)
        else:
            y = (np.cos(2 * np.pi * 2.33 * t - 0.3) * np.exp(-t / 1.3) + 0.2) * np.exp(-t / 4.4)
        path = tmp_path / f"{kind}.csv"
        rows = ["# synthetic"] + [f"{a:.12g},{b:.12g}" for a, b in zip(t, y)]
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_rabi_report(self, tmp_path):
        trace = self.make_synthetic_trace(tmp_path)
        report_path = tmp_path / "report.json"
        result = cmd_fit(trace, "rabi", report_path)
        assert abs(result.params["frequency_hz"] / 2.57 - 1) < 1e-6
        report = json.loads(report_path.read_text())
        assert report["converged"] is True
        assert abs(report["params"]["t_rabi_s"] / 1.6 - 1) < 1e-6
        curve = report_path.with_name("report_curve.csv")
        assert curve.exists()

    def test_ramsey_report(self, tmp_path):
        trace = self.make_synthetic_trace(tmp_path, "ramsey")
        result = cmd_fit(trace, "ramsey", tmp_path / "ramsey.json")
        assert abs(result.params["frequency_hz"] / 2.33 - 1) < 1e-6

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.1\n0.2\n")
        with pytest.raises(ConfigError, match="columns"):
            cmd_fit(path, "rabi", tmp_path / "out.json")

    def test_unknown_model(self, tmp_path):
        trace = self.make_synthetic_trace(tmp_path)
        with pytest.raises(ConfigError, match="unknown model"):
            cmd_fit(trace, "gaussian", tmp_path / "out.json")

    def test_simulated_glutamate_pipeline(self, tmp_path):
        # end to end: simulate at the resonance condition, fit the file
        cfg = rabi_config()
        cfg["protocol"]["transfer"]["nutation_hz"] = 599.31
        cfg["protocol"]["sweep"] = {"start": 0.02, "stop": 2.5, "count": 125}
        out = cmd_simulate(write_config(tmp_path, cfg), tmp_path / "glu")
        result = cmd_fit(out, "rabi", tmp_path / "glu.json", no_decay=True)
        assert abs(result.params["frequency_hz"] / 2.57 - 1) < 0.02


class TestScan:
    def scan_config(self, targets, tau_stop=1.6, tau_count=80):
        nus = sorted(resonant_nutation(52.0, d) for d in targets)
        return {
            "preset": "glutamate",
            "protocol": {
                "kind": "resonance_scan",
                "triplet_init": "phi_minus",
                "transfer": {"nutation_hz": 500.0, "transmitter_ppm": 2.04},
                "sweep": {"values": nus},
                "scan_tau": {"start": 0.02, "stop": tau_stop, "count": tau_count},
            },
        }

    def test_scan_output_and_lorentzian(self, tmp_path):
        cfg = self.scan_config([1.0, 1.6, 2.25, 3.0, 4.0, 5.5, 7.0])
        out = cmd_scan(write_config(tmp_path, cfg), tmp_path / "scan")
        lines = out.read_text().splitlines()
        data = [l for l in lines if not l.startswith("#")]
        assert len(data) == 7
        footer = [l for l in lines if l.startswith("# lorentzian:")]
        assert footer
        fit = json.loads(footer[0].split("# lorentzian:")[1])
        assert abs(fit["params"]["center"] / 2.25 - 1) < 0.15

    def test_two_point_grid_skips_lorentzian(self, tmp_path, capsys):
        cfg = self.scan_config([1.5, 3.0], tau_count=40)
        out = cmd_scan(write_config(tmp_path, cfg), tmp_path / "scan2")
        assert "# lorentzian" not in out.read_text()

    def test_symmetric_grid_symmetric_amplitudes(self, tmp_path):
        cfg = self.scan_config([1.25, 2.25, 3.25], tau_count=60)
        out = cmd_scan(write_config(tmp_path, cfg), tmp_path / "scan3")
        rows = [l.split(",") for l in out.read_text().splitlines() if not l.startswith("#")]
        amps = {float(r[1]): float(r[2]) for r in rows}
        assert abs(amps[min(amps)] - amps[max(amps)]) < 0.05

    def test_scan_requires_scan_protocol(self, tmp_path):
        with pytest.raises(ConfigError, match="resonance_scan"):
            cmd_scan(write_config(tmp_path, rabi_config()), tmp_path / "bad")


class TestMainEntry:
    def test_simulate_and_fit_via_main(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, rabi_config())
        assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "m")]) == 0
        trace = tmp_path / "m" / "trace.csv"
        code = main(
            ["fit", "--trace", str(trace), "--model", "rabi", "--no-decay",
             "--out", str(tmp_path / "m" / "fit.json")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "frequency_hz" in out

    def test_missing_config_exits_one(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
        assert "input error" in capsys.readouterr().err

    def test_bad_trace_exits_one(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("justtext\n")
        code = main(["fit", "--trace", str(path), "--model", "rabi", "--out", str(tmp_path / "r.json")])
        assert code == 1

    def test_presets_dump(self, capsys):
        assert main(["presets", "--dump", "glutamate"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["pairs"] == [[0, 1], [2, 3]]
        assert len(payload["offsets_hz"]) == 4

    def test_presets_list(self, capsys):
        assert main(["presets", "--list"]) == 0
        names = capsys.readouterr().out.split()
        assert "glutamate" in names and "phe-gly-gly" in names
