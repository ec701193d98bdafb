import math

import pytest

from polariton import ConfigError
from polariton.config import OutputOptions, emit_config, parse_config

TWO_PI = 2.0 * math.pi


MINIMAL = """
[run]
scenario = storage-50us
"""


class TestParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.scenario == "storage-50us"
        assert cfg.params == {}
        eff = cfg.effective()
        assert eff.params["medium.n"] == 1e12
        assert eff.params["schedule.tau"] == 50.0

    def test_wavelength_unit_conversion(self):
        cfg = parse_config(MINIMAL + "[medium]\nwavelength = 795 nm\n")
        assert cfg.params["medium.wavelength"] == pytest.approx(7.95e-5,
                                                                rel=1e-12)

    def test_frequency_units_are_angular(self):
        cfg = parse_config(MINIMAL + "[medium]\ngamma_opt = 100 MHz\n")
        assert cfg.params["medium.gamma_opt"] == pytest.approx(
            TWO_PI * 100.0, rel=1e-12)

    def test_negative_density_names_the_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "[medium]\nn = -3 /cm^3\n")
        assert len(err.value.problems) == 1
        assert "medium.n" in err.value.problems[0]

    def test_all_violations_reported(self):
        bad = """
[run]
scenario = storage-50us
[medium]
n = -3 /cm^3
wavelength = 795 parsecs
[pulse]
fwhm = banana us
"""
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert len(err.value.problems) == 3

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(MINIMAL + "[medium]\nrefractive_index = 1.5\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(MINIMAL + "[lasers]\npower = 5\n")

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="not a time unit"):
            parse_config(MINIMAL + "[schedule]\ntau = 50 nm\n")

    def test_missing_unit_rejected(self):
        with pytest.raises(ConfigError, match="number> <unit"):
            parse_config(MINIMAL + "[schedule]\ntau = 50\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(MINIMAL + "[schedule]\ntau = 50 us\ntau = 60 us\n")

    def test_missing_scenario_rejected(self):
        with pytest.raises(ConfigError, match="must name a scenario"):
            parse_config("[medium]\nn = 1e12 /cm^3\n")

    def test_key_foreign_to_scenario_rejected(self):
        with pytest.raises(ConfigError, match="not a parameter"):
            parse_config(MINIMAL + "[spectrum]\nb_max = 50 mG\n")

    def test_line_numbers_in_messages(self):
        text = MINIMAL + "[schedule]\ntau = oops us\n"
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert "line 5" in err.value.problems[0]

    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\n; another\n" + MINIMAL \
            + "[schedule]\n# inner\ntau = 42 us\n"
        cfg = parse_config(text)
        assert cfg.params["schedule.tau"] == 42.0

    def test_output_options(self):
        text = MINIMAL + """
[output]
detector_csv = false
plot_data = true
snapshots = 88 us, 0.12 ms
"""
        cfg = parse_config(text)
        assert cfg.outputs == OutputOptions(detector_csv=False,
                                            summary_json=True,
                                            plot_data=True,
                                            snapshots=(88.0, 120.0))


class TestRoundTrip:
    def test_effective_round_trip_identity(self):
        cfg = parse_config(MINIMAL + "[medium]\nwavelength = 795 nm\n"
                           + "[output]\nsnapshots = 88 us\n")
        eff = cfg.effective()
        text = emit_config(eff)
        again = parse_config(text)
        assert again == eff
        # and idempotent
        assert emit_config(again) == text

    def test_round_trip_for_spectrum_scenario(self):
        cfg = parse_config("[run]\nscenario = spectrum-fig1b\n")
        eff = cfg.effective()
        assert parse_config(emit_config(eff)) == eff
