"""Config parser: defaults, overrides, and hard rejection of bad input."""

import pytest

from lfmhd.config import ConfigError, load_config, parse_config


def test_empty_text_gives_defaults():
    cfg = parse_config("")
    assert cfg.grid.n1 == 16 and cfg.grid.n2 == 16 and cfg.grid.n3 == 16
    assert cfg.grid.dealias_fraction == pytest.approx(2.0 / 3.0)
    assert cfg.physics.diffusivity == 1.0
    assert cfg.physics.c0 == 0.25
    assert cfg.scheme.kappa == 0.1
    assert cfg.scheme.kappa_list == ()
    assert cfg.scheme.dt == 0.0125
    assert cfg.data.preset == "quiescent"
    assert cfg.outputs.checkpoint is False
    assert cfg.diagnostics.max_time_order == 2


def test_overrides_comments_and_blank_lines():
    text = """
    # a comment line
    grid.n1 = 32          # trailing comment
    grid.n3 = 24

    scheme.kappa = 0.2
    scheme.kappa_list = 0.2, 0.1 0.05
    data.preset = magnetic-tube
    data.amplitude = 0.3
    outputs.checkpoint = on
    diagnostics.lemma_suite = yes
    """
    cfg = parse_config(text)
    assert cfg.grid.n1 == 32 and cfg.grid.n2 == 16 and cfg.grid.n3 == 24
    assert cfg.scheme.kappa == 0.2
    assert cfg.scheme.kappa_list == (0.2, 0.1, 0.05)
    assert cfg.data.preset == "magnetic-tube"
    assert cfg.data.amplitude == 0.3
    assert cfg.outputs.checkpoint is True
    assert cfg.diagnostics.lemma_suite is True


@pytest.mark.parametrize("raw,expected", [
    ("on", True), ("true", True), ("yes", True), ("1", True),
    ("off", False), ("false", False), ("no", False), ("0", False),
])
def test_bool_spellings(raw, expected):
    cfg = parse_config(f"outputs.checkpoint = {raw}")
    assert cfg.outputs.checkpoint is expected


def test_unknown_key_is_fatal():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("grid.n4 = 8")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("scheme.kapa = 0.1")


def test_malformed_line_is_fatal():
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config("grid.n1 16")


def test_bad_value_reports_key_and_line():
    with pytest.raises(ConfigError, match="<config>:2.*grid.n1"):
        parse_config("# header\ngrid.n1 = twelve")
    with pytest.raises(ConfigError, match="outputs.checkpoint"):
        parse_config("outputs.checkpoint = maybe")


@pytest.mark.parametrize("line,fragment", [
    ("grid.n1 = 7", "even and >= 8"),
    ("grid.n2 = 6", "even and >= 8"),
    ("grid.n3 = 4", ">= 8"),
    ("grid.dealias_fraction = 0", "dealias_fraction"),
    ("grid.dealias_fraction = 1.5", "dealias_fraction"),
    ("physics.diffusivity = -1", "diffusivity"),
    ("physics.c0 = -0.1", "c0"),
    ("scheme.kappa = 0", "kappa"),
    ("scheme.kappa_list = 0.1 0.2", "strictly decreasing"),
    ("scheme.kappa_list = 0.1 -0.05", "positive"),
    ("scheme.dt = 0", "dt"),
    ("scheme.T = -0.1", "T"),
    ("scheme.cfl_safety = 1.2", "cfl_safety"),
    ("scheme.picard_max_iter = 0", "picard_max_iter"),
    ("data.preset = vortex", "preset"),
    ("data.amplitude = -0.1", "amplitude"),
    ("outputs.snapshot_stride = 0", "snapshot_stride"),
    ("diagnostics.max_time_order = 3", "max_time_order"),
])
def test_range_validation(line, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(line)


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("grid.n1 = 32\nscheme.T = 0.1\n")
    cfg = load_config(path)
    assert cfg.grid.n1 == 32
    assert cfg.scheme.T == 0.1


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


def test_error_names_the_source_file(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("grid.n1 = 32\nnope.key = 1\n")
    with pytest.raises(ConfigError, match=r"bad\.cfg:2"):
        load_config(path)
