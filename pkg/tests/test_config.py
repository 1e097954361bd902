"""
Tests for the Run Configuration
=================================

LEARNING POINT: Injecting the Environment
--------------------------------------------
`parse_config` reads os.environ by default. Every test here passes an
explicit `env` mapping instead, so results never depend on the shell the
tests run in.
"""

from pathlib import Path

import numpy as np
import pytest
import yaml

from gliorad.core.errors import ConfigurationError, InfeasibleBudgetError
from gliorad.core.fields import FieldRole, SpaceTimeField, integrate
from gliorad.core.tissue import EllipseRegion
from gliorad.io.config import (
    DEFAULTS,
    Config,
    ConstantStateSpec,
    RunConfig,
    RunMode,
    build_initial_control,
    build_initial_state,
    build_run_objects,
    dump_config,
    parse_config,
)
from gliorad.io.results import ResultStore


CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture
def write_config(tmp_path):
    """Write a mapping as YAML and return its path."""

    def _write(data, name="run.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data))
        return path

    return _write


# ─── Layering ────────────────────────────────────────────────

def test_defaults_only():
    config = parse_config(env={})

    assert config == RunConfig()
    assert config.mode == RunMode.FORWARD
    assert config.grid.cells_per_axis == [100]
    assert config.control.penalty == 100.0


def test_file_overrides_defaults_key_by_key(write_config):
    path = write_config({"grid": {"cells_per_axis": [40]}, "control": {"budget": 0.75}})

    config = parse_config(path, env={})

    assert config.grid.cells_per_axis == [40]
    assert config.grid.num_time_steps == 500
    assert config.control.budget == 0.75
    assert config.control.upper_bound == 1.0


def test_environment_overrides_file(write_config):
    path = write_config({"optimizer": {"max_iterations": 10}})
    env = {
        "GLIORAD_OPTIMIZER__MAX_ITERATIONS": "7",
        "GLIORAD_OPTIMIZER__POLISH": "true",
        "GLIORAD_LOG_LEVEL": "DEBUG",
        "UNRELATED": "1",
    }

    config = parse_config(path, env=env)

    assert config.optimizer.max_iterations == 7
    assert config.optimizer.polish is True


def test_cli_overrides_win_and_none_is_skipped(write_config):
    path = write_config({"mode": "adjoint", "seed": 3})

    config = parse_config(
        path, {"mode": "verify", "seed": None, "output_dir": Path("elsewhere")}, env={}
    )

    assert config.mode == RunMode.VERIFY
    assert config.seed == 3
    assert config.output_dir == Path("elsewhere")


def test_kind_switch_replaces_section(write_config):
    path = write_config({"initial_state": {"kind": "constant", "value": 0.2}})

    config = parse_config(path, env={})

    assert config.initial_state == ConstantStateSpec(value=0.2)


def test_same_kind_merges_section(write_config):
    path = write_config({"initial_state": {"kind": "gaussian", "sharpness": 5.0}})

    config = parse_config(path, env={})

    assert config.initial_state.sharpness == 5.0
    assert config.initial_state.amplitude == 1.0


def test_json_run_file_is_accepted(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"mode": "optimize", "grid": {"num_time_steps": 50}}')

    config = parse_config(path, env={})

    assert config.mode == RunMode.OPTIMIZE
    assert config.grid.num_time_steps == 50


@pytest.mark.parametrize(
    "raw, expected",
    [("true", True), ("No", False), ("42", 42), ("1e-3", 1e-3), ("1", 1), ("abc", "abc")],
)
def test_parse_value(raw, expected):
    assert Config._parse_value(raw) == expected
    assert type(Config._parse_value(raw)) is type(expected)


def test_layered_config_dot_access():
    layered = Config(env={})

    layered.set("optimizer.max_iterations", 5)
    layered.set("new.section.key", "x")

    assert layered.get("optimizer.max_iterations") == 5
    assert layered.get("new.section.key") == "x"
    assert layered.get("missing.key", "fallback") == "fallback"
    assert DEFAULTS["optimizer"]["max_iterations"] == 200


# ─── Validation ──────────────────────────────────────────────

@pytest.mark.parametrize(
    "data, field_path",
    [
        ({"mode": "sideways"}, "mode"),
        ({"grid": {"bogus": 1}}, "grid.bogus"),
        ({"grid": {"cells_per_axis": [0]}}, "grid.cells_per_axis.0"),
        ({"grid": {"final_time": -1.0}}, "grid.final_time"),
        ({"tissue": {"d_white": 0.0}}, "tissue.d_white"),
        ({"control": {"upper_bound": 0.0}}, "control.upper_bound"),
        ({"seed": -1}, "seed"),
    ],
)
def test_invalid_fields_name_their_path(write_config, data, field_path):
    with pytest.raises(ConfigurationError) as exc_info:
        parse_config(write_config(data), env={})

    assert exc_info.value.field_path == field_path


def test_infeasible_budget_is_rejected_before_any_solve(write_config):
    path = write_config({"control": {"budget": 3.0}})

    with pytest.raises(InfeasibleBudgetError) as exc_info:
        parse_config(path, env={})

    assert exc_info.value.field_path == "control.budget"
    assert "2.5" in str(exc_info.value)


def test_missing_run_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        parse_config(tmp_path / "absent.yaml", env={})


def test_non_mapping_run_file(write_config):
    with pytest.raises(ConfigurationError, match="mapping"):
        parse_config(write_config([1, 2, 3]), env={})


def test_unparseable_run_file(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("grid: [unclosed\n")

    with pytest.raises(ConfigurationError, match="cannot parse"):
        parse_config(path, env={})


def test_missing_referenced_file(write_config):
    path = write_config({"initial_state": {"kind": "file", "path": "u0.csv"}})

    with pytest.raises(ConfigurationError) as exc_info:
        parse_config(path, env={})

    assert exc_info.value.field_path == "initial_state.path"


def test_piecewise_values_must_match_breakpoints(write_config):
    path = write_config(
        {"initial_control": {"kind": "piecewise", "breakpoints": [0.1], "values": [1.0]}}
    )

    with pytest.raises(ConfigurationError) as exc_info:
        parse_config(path, env={})

    assert exc_info.value.field_path.startswith("initial_control")


# ─── Shipped configs and round trips ─────────────────────────

@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    config = parse_config(path, env={})

    _, tissue = build_run_objects(config)
    assert tissue.white.any()
    assert config.output_dir.parts[0] == "results"


@pytest.mark.parametrize(
    "run_name, stem",
    [
        ("paper_1d_uniform", "study_1d_uniform"),
        ("paper_1d_distributed_g05", "study_1d_distributed_g05"),
        ("paper_1d_distributed_g075", "study_1d_distributed_g075"),
    ],
)
def test_reproduction_run_names_map_to_shipped_files(run_name, stem):
    listing = (CONFIG_DIR / "default.yaml").read_text()

    assert f"{run_name} " in listing
    for reading in ("absolute", "fraction"):
        config = parse_config(CONFIG_DIR / f"{stem}_{reading}.yaml", env={})
        assert config.mode == RunMode.OPTIMIZE
        assert config.tissue.region.coordinates == reading


def test_uniform_reproduction_config_setup():
    config = parse_config(CONFIG_DIR / "study_1d_uniform_absolute.yaml", env={})

    assert config.control.shape == "uniform_in_space"
    assert config.control.budget == 0.5
    assert config.control.penalty == 100.0
    assert config.initial_control.breakpoints == [0.4]
    assert config.initial_control.values == [0.0, 1.0]
    assert config.optimizer.precondition_penalty


def test_two_dimensional_config_builds_ellipse():
    assert "paper_2d " in (CONFIG_DIR / "default.yaml").read_text()
    config = parse_config(CONFIG_DIR / "study_2d.yaml", env={})

    assert isinstance(config.tissue.region, EllipseRegion)
    assert config.grid.dim == 2
    assert config.control.budget == 0.7


def test_dump_config_round_trips(tmp_path, write_config):
    original = parse_config(
        write_config({"mode": "optimize", "control": {"shape": "uniform_in_space"}}), env={}
    )

    dumped = dump_config(original, tmp_path / "echo" / "config.yaml")

    assert parse_config(dumped, env={}) == original


# ─── Builders ────────────────────────────────────────────────

def test_file_initial_state_resolves_relative_to_config(tmp_path, write_config):
    grid, _ = build_run_objects(parse_config(write_config({"grid": {"cells_per_axis": [10]}}),
                                             env={}))
    values = np.linspace(0.0, 1.0, grid.num_cells)[:, None] * np.ones(grid.shape)
    ResultStore(tmp_path).write_field("u0.csv", SpaceTimeField(grid, values, FieldRole.STATE))
    path = write_config({
        "grid": {"cells_per_axis": [10]},
        "initial_state": {"kind": "file", "path": "u0.csv"},
    })

    config = parse_config(path, env={})

    assert config.initial_state.path == tmp_path / "u0.csv"
    np.testing.assert_array_equal(build_initial_state(config, grid), values[:, 0])


def test_file_initial_control_shape_mismatch(tmp_path, write_config):
    small, _ = build_run_objects(parse_config(write_config({"grid": {"cells_per_axis": [10]}}),
                                              env={}))
    ResultStore(tmp_path).write_field(
        "control.csv", SpaceTimeField(small, np.zeros(small.shape), FieldRole.CONTROL)
    )
    config = parse_config(
        write_config({"initial_control": {"kind": "file", "path": "control.csv"}}), env={}
    )
    _, tissue = build_run_objects(config)

    with pytest.raises(ConfigurationError) as exc_info:
        build_initial_control(config, tissue)

    assert exc_info.value.field_path == "initial_control.path"


@pytest.mark.parametrize(
    "spec, expected_integral",
    [
        ({"kind": "budget_uniform"}, 0.5),
        ({"kind": "white_matter_uniform"}, 0.5),
        ({"kind": "constant", "value": 0.2}, 0.5),
        ({"kind": "piecewise", "breakpoints": [0.25], "values": [0.4, 0.4]}, 1.0),
    ],
)
def test_initial_control_kinds(write_config, spec, expected_integral):
    config = parse_config(write_config({"initial_control": spec}), env={})
    _, tissue = build_run_objects(config)

    control = build_initial_control(config, tissue)

    assert integrate(control) == pytest.approx(expected_integral, rel=1e-12)


def test_gaussian_center_must_match_dimension(write_config):
    config = parse_config(
        write_config({"initial_state": {"kind": "gaussian", "center": [1.0, 2.0]}}), env={}
    )
    grid, _ = build_run_objects(config)

    with pytest.raises(ConfigurationError) as exc_info:
        build_initial_state(config, grid)

    assert exc_info.value.field_path == "initial_state.center"
