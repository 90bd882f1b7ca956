import pytest

from core.config import build_config, load_config, parse_config, serialize_config
from core.preset import load_preset_defaults
from physics.errors import ParseError, ValidationError

MINIMAL = """\
preset: decay
gas.gamma: 1.6666666666666667
radius.outer: 2.5
"""


def test_minimal_config_fills_defaults():
    config = parse_config(MINIMAL)
    assert config.preset == "decay"
    assert config.gas.gamma == pytest.approx(5.0 / 3.0)
    assert config.outer_radius == 2.5
    assert config.target_mass is None
    assert config.n_cells == 256
    assert config.grading_power == 2.0
    assert config.cfl == 0.4
    assert config.fit_window == (5.0, 40.0)
    assert not config.gravity_enabled


def test_nested_form_is_equivalent():
    nested = """\
preset: decay
gas:
  gamma: 1.6666666666666667
radius:
  outer: 2.5
"""
    assert parse_config(nested) == parse_config(MINIMAL)


def test_radius_and_mass_are_exclusive():
    with pytest.raises(ValidationError):
        parse_config(MINIMAL + "radius.mass: 1.0\n")
    with pytest.raises(ValidationError):
        parse_config("preset: decay\n")


def test_unknown_keys_are_listed():
    with pytest.raises(ValidationError) as excinfo:
        parse_config(MINIMAL + "grid.cells: 10\nrun.speed: 2\n")
    assert excinfo.value.context["keys"] == ["grid.cells", "run.speed"]


@pytest.mark.parametrize("line, field", [
    ("perturbation.amplitude: 0.5", "perturbation.amplitude"),
    ("grid.n_cells: 4", "grid.n_cells"),
    ("grid.n_cells: 30", "grid.n_cells"),
    ("spectrum.compare_n_cells: 510", "spectrum.compare_n_cells"),
    ("grid.grading_power: 0.5", "grid.grading_power"),
    ("run.cfl: 1.5", "run.cfl"),
    ("diagnostics.j_max: 3", "diagnostics.j_max"),
    ("grid.n_cells: many", "grid.n_cells"),
])
def test_field_validation(line, field):
    with pytest.raises(ValidationError) as excinfo:
        parse_config(MINIMAL + line + "\n")
    assert excinfo.value.context["field"] == field


def test_fit_window_order():
    with pytest.raises(ValidationError):
        parse_config(MINIMAL + "run.fit_start: 10.0\nrun.fit_end: 5.0\n")


def test_outer_radius_must_exceed_core():
    with pytest.raises(ValidationError):
        parse_config("preset: decay\nradius.outer: 0.5\n")


def test_syntax_error_reports_line():
    with pytest.raises(ParseError) as excinfo:
        parse_config("preset: decay\nradius.outer: [2.5,\n")
    assert excinfo.value.code == "parse_error"
    assert excinfo.value.context["line"] >= 1


def test_top_level_must_be_mapping():
    with pytest.raises(ParseError):
        parse_config("- decay\n- 2.5\n")


def test_serialized_config_parses_back():
    config = parse_config(MINIMAL + "sweep.gammas: [1.4, 2.0]\nspectrum.weight_floor: 1.0e-10\n")
    assert parse_config(serialize_config(config)) == config


def test_mass_overrides_preset_radius():
    base = {"radius.outer": 2.5, "grid.n_cells": 128}
    config = parse_config("preset: decay\nradius.mass: 0.5\n", base=base)
    assert config.outer_radius is None
    assert config.target_mass == 0.5
    assert config.n_cells == 128


def test_load_config_applies_preset_defaults(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("preset: decay\nrun.t_end: 10.0\nrun.fit_end: 10.0\n", encoding="utf-8")
    config = load_config(str(path), preset_defaults=load_preset_defaults)
    assert config.outer_radius == 2.5
    assert config.compare_mesh is True
    assert config.t_end == 10.0


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        load_config(str(tmp_path / "missing.yaml"))


def test_build_config_requires_preset():
    with pytest.raises(ValidationError):
        build_config({"radius.outer": 2.5})
