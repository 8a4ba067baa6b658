"""Tests for experiment configuration parsing."""

import os
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core import parameters
from core.exceptions import ConfigParseError, ConfigurationError
from surveil.experiment_config import load_config, parse_config, with_overrides

FIXTURES = Path(__file__).parent / "fixtures"

MINIMAL = "[experiment]\nscenario = a2a_power\nseed = 2024\n"


def parse(body: str, scenario: str = 'a2a_power', **kwargs):
    text = f"[experiment]\nscenario = {scenario}\nseed = 1\n\n{body}"
    return parse_config(text, source='test.ini', **kwargs)


class TestRequiredKeys:

    def test_empty_file(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse_config("", source='empty.ini')
        assert excinfo.value.missing == ('experiment.scenario', 'experiment.seed')

    def test_missing_seed(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse_config("[experiment]\nscenario = a2g_sweep\n")
        assert excinfo.value.missing == ('experiment.seed',)

    def test_minimal_uses_defaults(self):
        config = parse_config(MINIMAL)
        assert config.scenario == 'a2a_power'
        assert config.seed == 2024
        assert config.a2a.sub_tx_power == parameters.P_SUB_MAX_W
        assert config.mec.window_size == parameters.WINDOW_SIZE
        assert config.stochastic


class TestReferenceValues:

    def test_reference_fixture_matches_defaults(self):
        written = load_config(FIXTURES / "reference_values.ini")
        defaults = parse_config(MINIMAL)
        assert written.values == defaults.values
        assert written.text_sha256 != defaults.text_sha256

    def test_db_values_resolved_once(self):
        config = parse_config(MINIMAL)
        db, linear = config.resolved['a2a.g_a_dbi']
        assert db == 23.0
        assert linear == pytest.approx(199.526, rel=1e-5)
        assert config.a2a.total_gain == linear
        # -174 dBm/Hz over 100 MHz
        assert config.resolved['a2a.noise_power_dbm'][0] == pytest.approx(-94.0)
        assert config.resolved['a2a.theta_grid_db[-7]'][1] == pytest.approx(0.19953, rel=1e-4)

    def test_noise_override(self):
        config = load_config(FIXTURES / "noise_limited.ini")
        assert config.a2a.noise_power == pytest.approx(parameters.dbm_to_watts(5.0))
        assert config.a2a.sub_tx_power_grid == (1.0, 10.0, 20.0)
        assert not config.a2a.analytic

    def test_high_layer_noise_uses_adsb_bandwidth(self):
        config = parse("[a2a]\nlayer = high\n")
        assert config.resolved['a2a.noise_power_dbm'][0] == pytest.approx(-114.0)


class TestErrors:

    def test_out_of_range_value_has_location(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse("[a2a]\np_s_w = -1\n")
        assert str(excinfo.value).startswith("test.ini:6:")
        assert excinfo.value.key == 'p_s_w'

    def test_malformed_number(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse("[airspace]\ngs_height_m = fifty\n")
        assert excinfo.value.location == "test.ini:6"

    def test_duplicate_key(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse_config("[experiment]\nscenario = a2g_sweep\nseed = 1\nseed = 2\n", source='dup.ini')
        assert excinfo.value.key == 'seed'
        assert excinfo.value.location == 'dup.ini:4'

    def test_unknown_key(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse("[a2a]\ncolour = blue\n")
        assert excinfo.value.key == 'colour'

    def test_unknown_section(self):
        with pytest.raises(ConfigParseError, match="unknown section"):
            parse("[radar]\nrange = 5\n")

    def test_unknown_scenario(self):
        with pytest.raises(ConfigParseError):
            parse_config("[experiment]\nscenario = a2x\nseed = 1\n")

    def test_exponent_out_of_range(self):
        with pytest.raises(ConfigParseError):
            parse("[a2a]\ndelta = 5\n")

    def test_coverage_needs_enough_trials(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse_config("[experiment]\nscenario = a2a_power\nseed = 1\ntrials = 500\n")
        assert excinfo.value.key == 'trials'

    def test_density_sweep_allows_few_trials(self):
        config = parse_config("[experiment]\nscenario = a2a_density\nseed = 1\ntrials = 500\n")
        assert config.trials == 500

    def test_analytic_needs_rayleigh(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse("[a2a]\niota = 2\n")
        assert excinfo.value.key == 'iota'

    def test_height_range_order(self):
        with pytest.raises(ConfigParseError):
            parse("[a2g]\nh_low_min_m = 3000\nh_low_max_m = 2000\n", scenario='a2g_sweep')

    def test_window_size(self):
        with pytest.raises(ConfigParseError):
            parse("[mec]\nwindow_size = 1\n")


class TestTrajectoryScenario:

    def test_needs_input_file(self):
        with pytest.raises(ConfigParseError) as excinfo:
            parse("", scenario='trajectory')
        assert excinfo.value.missing == ('mec.input_sbs',)

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(ConfigParseError, match="not found"):
            parse("[mec]\ninput_sbs = nowhere.sbs\n", scenario='trajectory', base_dir=tmp_path)

    def test_relative_to_config(self):
        config = load_config(FIXTURES / "trajectory.ini")
        assert config.input_sbs == FIXTURES / "single_track.sbs"
        assert not config.stochastic

    def test_repository_config(self):
        config = load_config(Path(__file__).parent.parent / "configs" / "trajectory.ini")
        assert config.input_sbs.is_file()


class TestOverrides:

    def test_seed_and_trials(self):
        config = parse_config(MINIMAL)
        changed = with_overrides(config, seed=9, trials=5000)
        assert changed.seed == 9
        assert changed.trials == 5000
        assert changed.values['experiment']['seed'] == 9
        assert config.values['experiment']['seed'] == 2024

    def test_nothing_to_override(self):
        config = parse_config(MINIMAL)
        assert with_overrides(config) is config

    def test_negative_seed(self):
        with pytest.raises(ConfigurationError):
            with_overrides(parse_config(MINIMAL), seed=-1)
