import json
import math

import pytest

from polariton.cli import cli_main

TWO_PI = 2.0 * math.pi

#: mild storage config: shallow medium, narrow line, short protocol
STORE_CFG = """
[run]
scenario = storage-50us

[medium]
n = 1e10 /cm^3
gamma_opt = 10 MHz

[schedule]
t0 = 75 us
tau = 30 us

[pulse]
peak_time = 46 us
fwhm = 10 us
cutoff_sigmas = 7.5

[grid]
nz = 128
"""


@pytest.fixture()
def store_cfg(tmp_path):
    path = tmp_path / "store.cfg"
    path.write_text(STORE_CFG, encoding="utf-8")
    return path


class TestValidate:
    def test_good_config_exits_zero(self, store_cfg, capsys):
        assert cli_main(["validate", str(store_cfg)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_bad_config_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[run]\nscenario = storage-50us\n"
                       "[medium]\nn = -1 /cm^3\n", encoding="utf-8")
        assert cli_main(["validate", str(bad)]) == 1
        assert "medium.n" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path):
        assert cli_main(["validate", str(tmp_path / "nope.cfg")]) == 1


class TestUsage:
    def test_unknown_subcommand_exits_one_with_usage(self, capsys):
        assert cli_main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_no_subcommand_exits_one(self, capsys):
        assert cli_main([]) == 1

    def test_list_scenarios(self, capsys):
        assert cli_main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "storage-50us" in out and "spectrum-fig1b" in out


class TestStore:
    def test_writes_expected_files(self, store_cfg, tmp_path):
        out = tmp_path / "out"
        assert cli_main(["store", "-c", str(store_cfg), "-o",
                         str(out)]) == 0
        names = {p.name for p in out.iterdir()}
        assert {"detector.csv", "summary.json", "effective.cfg"} <= names
        # no leftover temp files from the atomic writes
        assert all(not n.startswith(".") for n in names)
        assert len(names) == 3

    def test_detector_csv_format(self, store_cfg, tmp_path):
        out = tmp_path / "out"
        cli_main(["store", "-c", str(store_cfg), "-o", str(out)])
        raw = (out / "detector.csv").read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("ascii").splitlines()
        assert lines[0] == "t_us,intensity,control_rabi"
        first = lines[1].split(",")
        assert len(first) == 3
        assert float(first[0]) == 0.0

    def test_summary_has_unit_suffixed_observables(self, store_cfg,
                                                   tmp_path):
        out = tmp_path / "out"
        cli_main(["store", "-c", str(store_cfg), "-o", str(out)])
        payload = json.loads((out / "summary.json").read_text())
        obs = payload["observables"]
        assert "retrieval_efficiency" in obs
        assert "peak_I_amplitude" in obs and "peak_II_amplitude" in obs
        assert payload["adiabaticity"]["bandwidth_rad_us"] > 0

    def test_snapshots_flag(self, store_cfg, tmp_path):
        out = tmp_path / "out"
        cli_main(["store", "-c", str(store_cfg), "-o", str(out),
                  "--snapshots", "60,90"])
        names = {p.name for p in out.iterdir()}
        assert "snapshot_60.000us.csv" in names
        assert "snapshot_90.000us.csv" in names
        head = (out / "snapshot_60.000us.csv").read_text().splitlines()[0]
        assert head == ("z_cm,omega_s_re,omega_s_im,rho_ep_re,rho_ep_im,"
                        "rho_mp_re,rho_mp_im")

    def test_reruns_are_byte_identical(self, store_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cli_main(["store", "-c", str(store_cfg), "-o", str(out1)])
        cli_main(["store", "-c", str(store_cfg), "-o", str(out2)])
        assert (out1 / "detector.csv").read_bytes() \
            == (out2 / "detector.csv").read_bytes()
        assert (out1 / "summary.json").read_bytes() \
            == (out2 / "summary.json").read_bytes()

    def test_effective_config_round_trips(self, store_cfg, tmp_path):
        from polariton.config import parse_config
        out = tmp_path / "out"
        cli_main(["store", "-c", str(store_cfg), "-o", str(out)])
        eff = parse_config((out / "effective.cfg").read_text())
        assert eff.params["medium.n"] == 1e10
        assert eff.params["schedule.tau"] == 30.0

    def test_spectrum_scenario_under_store_fails_cleanly(self, tmp_path,
                                                         capsys):
        code = cli_main(["store", "--scenario", "spectrum-fig1b", "-o",
                         str(tmp_path / "x")])
        assert code == 1

    def test_requires_scenario_or_config(self, tmp_path):
        assert cli_main(["store", "-o", str(tmp_path / "x")]) == 1


class TestSpectrumCommand:
    def test_writes_curve(self, tmp_path):
        out = tmp_path / "spec"
        assert cli_main(["spectrum", "--scenario", "spectrum-fig1b", "-o",
                         str(out)]) == 0
        lines = (out / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "b_field_mG,delta_rad_per_us,transmission"
        assert len(lines) == 402
        payload = json.loads((out / "summary.json").read_text())
        assert payload["observables"]["fwhm_khz"] == pytest.approx(
            15.0, rel=1e-6)


class TestSweepCommand:
    def test_tau_sweep_outputs(self, store_cfg, tmp_path):
        out = tmp_path / "sw"
        code = cli_main(["sweep", "-c", str(store_cfg), "-o", str(out),
                         "--sweep-axis", "schedule.tau",
                         "--sweep-values", "30,80", "--parallel", "2"])
        assert code == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "value,efficiency"
        assert len(lines) == 3
        payload = json.loads((out / "summary.json").read_text())
        assert payload["fit"]["decay_constant_us"] == pytest.approx(
            150.0, rel=1e-6)

    def test_sweep_requires_axis_and_values(self, store_cfg, tmp_path):
        assert cli_main(["sweep", "-c", str(store_cfg), "-o",
                         str(tmp_path / "x")]) == 1
