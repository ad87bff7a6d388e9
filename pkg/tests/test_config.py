import numpy as np
import pytest

from swabsim.config import dump_config, load_config, load_scenario, parse_config, scenario_names
from swabsim.errors import ConfigError


def test_shipped_scenarios_listed():
    assert {"default", "compliance"} <= set(scenario_names())


def test_default_file_matches_documented_defaults():
    shipped = load_scenario("default")
    implicit = parse_config("[simulation]\nseed = 7\n")
    assert shipped == implicit
    assert shipped["simulation"]["dt"] == 0.008
    assert shipped["simulation"]["epsilon"] == 0.01
    assert np.array_equal(np.reshape(shipped["dynamics"]["damping"], (3, 3)), np.diag([16.0] * 3))
    assert [p.name.value for p in shipped.phases()] == ["Initial", "Left", "Right", "Middle"]


def test_negative_dt_names_constraint():
    with pytest.raises(ConfigError, match=r"line 3: .*dt > 0"):
        parse_config("# comment\n[simulation]\ndt = -1\n")


def test_omitted_gain_defaults_to_diagonal():
    cfg = parse_config("[avf]\nweights_p = 1 1 1\n")
    assert np.array_equal(cfg.controller().gain, np.diag([0.01] * 3))


def test_unknown_key_rejected_with_line():
    with pytest.raises(ConfigError, match=r"line 4: unknown key dynamics\.masss"):
        parse_config("[simulation]\ndt = 0.008\n[dynamics]\nmasss = 1 1 1\n")


@pytest.mark.parametrize("text", ["[solver]\nx = 1\n", "[wall]\npoint = 0 0 0\n", "[phase.Upper]\n"])
def test_unknown_sections_rejected(text):
    with pytest.raises(ConfigError, match="unknown"):
        parse_config(text)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[simulation]\ndt = fast\n", "expected numbers"),
        ("[dynamics]\nmass = 1 2\n", "expected 3 or 9 numbers"),
        ("[dynamics]\nmass = 1 -1 1\n", "positive-definite"),
        ("[calibration]\noffset_quadratic = 1e-4 2e-3 0.1\n", "origin"),
        ("[disturbance.touch]\nstart = 0.1\n", "required"),
        ("[phase.Right]\n[phase.Left]\n", "Initial -> Left"),
        ("[simulation\ndt = 1\n", "parse error"),
        ("[cavity]\nfree_space = maybe\n", "boolean"),
    ],
)
def test_validation_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


@pytest.mark.parametrize("name", ["default", "compliance"])
def test_dump_parse_round_trip(name):
    cfg = load_scenario(name)
    again = parse_config(dump_config(cfg))
    assert again == cfg
    assert dump_config(again) == dump_config(cfg)


def test_load_config_from_path(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text("[simulation]\nseed = 3 # inline comment\n", encoding="utf-8")
    assert load_config(p)["simulation"]["seed"] == 3


def test_unbounded_wall_extent_allowed():
    cfg = parse_config("[wall.Floor]\npoint = 0 0 -0.2\nnormal = 0 0 1\nextent = inf\n")
    assert list(cfg.walls()) == ["Floor"]
    assert cfg.cavity().wall("Floor").extent == np.inf


def test_unknown_scenario_name():
    with pytest.raises(ConfigError, match="shipped"):
        load_scenario("nope")
