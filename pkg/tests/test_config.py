import numpy as np
import pytest

from ac2d.config import (RunConfig, compile_initial_condition, emit_config,
                         parse_config, parse_config_text)
from ac2d.errors import ConfigError
from ac2d.presets import PRESETS, get_preset

MINIMAL = """
variant = classical
domain = 0, 1, 0, 1
epsilon = 0.01
degree = 1
elements = 8, 8
tau = 0.01
final_time = 0.1
ic = sin(pi*x)*sin(pi*y)
"""


class TestParsing:
    def test_minimal_defaults(self):
        cfg = parse_config_text(MINIMAL)
        assert cfg.solver == "full"
        assert cfg.cadence == 1
        assert cfg.snapshots == ()
        assert cfg.output_dir == "out"

    def test_round_trip_all_presets(self):
        for name, preset in PRESETS.items():
            assert parse_config_text(emit_config(preset.config)) == preset.config, name

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="frobnicate"):
            parse_config_text(MINIMAL + "frobnicate = 3\n")

    def test_parse_error_carries_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("variant = classical\nnot a key value pair\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text(MINIMAL + "variant = rslm\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="domain"):
            parse_config_text("variant = classical\n")

    def test_comments_and_blank_lines(self):
        cfg = parse_config_text("# header\n\n" + MINIMAL + "\n# trailing\n")
        assert cfg.variant == "classical"

    def test_file_reader(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text(MINIMAL)
        assert parse_config(path) == parse_config_text(MINIMAL)
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "missing.txt")


class TestValidation:
    def test_low_rank_solver_needs_rank(self):
        with pytest.raises(ConfigError, match="rank"):
            parse_config_text(MINIMAL + "solver = dlr2\n")

    def test_bad_rank_syntax(self):
        with pytest.raises(ConfigError, match="rank"):
            parse_config_text(MINIMAL + "solver = dlr2\nrank = loose:8\n")

    def test_tau_exceeding_final_time(self):
        bad = MINIMAL.replace("tau = 0.01", "tau = 0.5")
        with pytest.raises(ConfigError, match="tau"):
            parse_config_text(bad)

    def test_snapshot_outside_horizon(self):
        with pytest.raises(ConfigError, match="snapshot"):
            parse_config_text(MINIMAL + "snapshots = 0.0, 0.5\n")

    def test_degree_bounds(self):
        bad = MINIMAL.replace("degree = 1", "degree = 5")
        with pytest.raises(ConfigError, match="degree"):
            parse_config_text(bad)


class TestInitialConditions:
    def test_expression_grammar(self):
        f = compile_initial_condition("0.5*sin(2*pi*x)*cos(y)^2 - tanh(x/2)", 0.01)
        x, y = 0.3, -0.2
        expected = 0.5 * np.sin(2 * np.pi * x) * np.cos(y) ** 2 - np.tanh(x / 2)
        assert f(x, y) == pytest.approx(expected, rel=1e-14)

    def test_unicode_pi(self):
        f = compile_initial_condition("sin(π*x)", 0.01)
        assert f(0.5, 0.0) == pytest.approx(1.0)

    def test_unknown_function_rejected(self):
        with pytest.raises(ConfigError, match="exp"):
            compile_initial_condition("exp(x)", 0.01)

    def test_unknown_name_rejected(self):
        with pytest.raises(ConfigError, match="z"):
            compile_initial_condition("x + z", 0.01)

    def test_attribute_access_rejected(self):
        with pytest.raises(ConfigError):
            compile_initial_condition("x.__class__", 0.01)

    def test_kiss_bubble_defaults_use_config_epsilon(self):
        f = compile_initial_condition("kiss_bubble", 0.01)
        # +1 inside a bubble, -1 far away
        assert f(0.0, -0.2) == pytest.approx(1.0, abs=1e-6)
        assert f(0.45, 0.45) == pytest.approx(-1.0, abs=1e-6)

    def test_kiss_bubble_parameters(self):
        f = compile_initial_condition("kiss_bubble(radius=0.1, x1=-0.2, y1=0.0, x2=0.2, y2=0.0)", 0.01)
        assert f(-0.2, 0.0) == pytest.approx(1.0, abs=1e-5)
        assert f(0.2, 0.0) == pytest.approx(1.0, abs=1e-5)

    def test_kiss_bubble_unknown_parameter(self):
        with pytest.raises(ConfigError, match="wobble"):
            compile_initial_condition("kiss_bubble(wobble=1)", 0.01)


class TestPresets:
    def test_kiss_bubble_preset_parameters(self):
        cfg = get_preset("kiss-bubble-rslm").config
        assert cfg.domain == (-0.5, 0.5, -0.5, 0.5)
        assert cfg.epsilon == 0.01
        assert "radius=0.19" in cfg.ic and "y1=-0.2" in cfg.ic and "y2=0.2" in cfg.ic
        # quoted node counts are interpreted as nodes: elements = (nodes-1)/degree
        assert cfg.elements == (255, 255)
        assert cfg.degree == 1

    def test_modified_energy_preset_parameters(self):
        cfg = get_preset("modified-energy").config
        assert cfg.domain[1] == pytest.approx(2 * np.pi)
        assert cfg.ic == "0.05*sin(x)*sin(y)"
        assert cfg.elements == (128, 128)  # 129 nodes per direction
        assert cfg.rank == "adaptive-rel:0.01"

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            get_preset("nonexistent")

    def test_all_presets_validate(self):
        for preset in PRESETS.values():
            preset.config.validate()
