"""
Run Configuration
==================

LEARNING POINT: Layered Configuration
----------------------------------------
A run is described by one nested mapping assembled from layers:

  1. DEFAULTS (mirrored, with comments, in config/default.yaml)
  2. the run file (YAML; JSON works too, since JSON is valid YAML)
  3. environment variables  GLIORAD_<SECTION>__<KEY>=value
  4. command-line flags (--mode, --output-dir, --seed)

Higher layers override lower layers key by key (deep merge). A section
that carries a `kind` (initial_state, initial_control, tissue.region)
switches variants wholesale: when a higher layer names a different kind,
the lower layer's keys for that section are dropped.

LEARNING POINT: Validate Early, Name the Field
-------------------------------------------------
The merged mapping is validated into pydantic models, then the grid,
tissue map, budget feasibility and referenced files are all checked
before any solve starts. Every failure becomes a ConfigurationError that
names the offending field path, e.g.

    grid.cells_per_axis.0: must be at least 2, got 1
    control.budget: need 0 < budget/M <= |Omega|*T, got ...

Example run file:

    mode: optimize
    grid:
      lengths: [5.0]
      cells_per_axis: [100]
    control:
      shape: uniform_in_space
      budget: 0.5
    initial_control:
      kind: piecewise
      breakpoints: [0.1, 0.3]
      values: [1.0, 0.5, 0.0]
"""

import copy
import os
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from gliorad.control.initial import budget_uniform, piecewise_in_time, white_matter_uniform
from gliorad.control.optimizer import OptimizerConfig
from gliorad.core.control_spec import ControlSpec
from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import FieldRole, SpaceTimeField, constant
from gliorad.core.grid import Grid, GridConfig, build_grid
from gliorad.core.initial import constant_state, gaussian_state
from gliorad.core.tissue import TissueConfig, TissueMap, tissue_from_config
from gliorad.io.results import read_field_csv
from gliorad.solvers.linear import SolverConfig
from gliorad.utils.logger import LEVEL_ENV_VAR, setup_logger
from gliorad.verification.suite import VerifyConfig


logger = setup_logger(__name__)

ENV_PREFIX = "GLIORAD_"
ENV_NESTING = "__"
# Variables with the prefix that are read elsewhere
ENV_RESERVED = {LEVEL_ENV_VAR}


DEFAULTS: dict[str, Any] = {
    "mode": "forward",
    "grid": {
        "dim": 1,
        "lengths": [5.0],
        "cells_per_axis": [100],
        "num_time_steps": 500,
        "final_time": 0.5,
    },
    "tissue": {
        "region": {
            "kind": "intervals",
            "intervals": [[0.15, 0.35]],
            "coordinates": "absolute",
        },
        "d_white": 1.0,
        "d_grey": 0.001,
    },
    "control": {
        "shape": "distributed",
        "upper_bound": 1.0,
        "budget": 0.5,
        "penalty": 100.0,
        "proliferation": 1.0,
    },
    "solver": {
        "newton_tolerance": 1e-10,
        "newton_max_iterations": 50,
        "linear_solver_tolerance": 1e-12,
        "adjoint_scheme": "continuous",
    },
    "optimizer": {
        "initial_step": 1.0,
        "max_iterations": 200,
        "step_growth": 2.0,
        "step_shrink": 0.5,
        "tolerance": 1e-6,
        "stall_window": 10,
        "bang_bang_tolerance": 0.01,
        "polish": False,
        "precondition_penalty": False,
    },
    "initial_state": {"kind": "gaussian", "sharpness": 8.0, "amplitude": 1.0},
    "initial_control": {"kind": "budget_uniform"},
    "verify": {},
    "output_dir": "results",
    "seed": 0,
}


class Config:
    """
    Layered configuration mapping with dot-notation access.

    Each run owns its own instance; nothing is shared between runs.
    """

    def __init__(
        self,
        config_path: str | Path | None = None,
        env: Mapping[str, str] | None = None,
    ):
        self._path = Path(config_path) if config_path else None

        # Layer 1: defaults
        self._data: dict = copy.deepcopy(DEFAULTS)

        # Layer 2: run file
        if self._path is not None:
            self._load_file()

        # Layer 3: environment
        self._load_env_overrides(os.environ if env is None else env)

        logger.debug(f"Configuration assembled from: {self._path or 'defaults'}")

    @property
    def path(self) -> Path | None:
        return self._path

    def get(self, key: str, default: Any = None) -> Any:
        """Value at a dot-separated path ("optimizer.max_iterations"), or `default`."""
        value = self._data
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """Set a value at a dot-separated path, creating sections as needed."""
        keys = key.split(".")
        data = self._data
        for k in keys[:-1]:
            if k not in data or not isinstance(data[k], dict):
                data[k] = {}
            data = data[k]
        data[keys[-1]] = value

    def as_dict(self) -> dict:
        return copy.deepcopy(self._data)

    def _load_file(self) -> None:
        if not self._path.is_file():
            raise ConfigurationError(f"config file not found: {self._path}")
        try:
            with open(self._path, encoding="utf-8") as f:
                file_data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"cannot parse {self._path}: {e}") from e
        if not isinstance(file_data, dict):
            raise ConfigurationError(f"{self._path} must hold a mapping at the top level")
        self._deep_merge(self._data, file_data)

    def _load_env_overrides(self, env: Mapping[str, str]) -> None:
        """GLIORAD_OPTIMIZER__MAX_ITERATIONS=50  ->  optimizer.max_iterations = 50"""
        for key, value in sorted(env.items()):
            if not key.startswith(ENV_PREFIX) or key in ENV_RESERVED:
                continue
            config_key = key[len(ENV_PREFIX):].lower().replace(ENV_NESTING, ".")
            self.set(config_key, self._parse_value(value))
            logger.debug(f"Environment override: {config_key}")

    @staticmethod
    def _parse_value(value: str) -> Any:
        """Parse an environment string into bool, int, float or str."""
        if value.lower() in ("true", "yes"):
            return True
        if value.lower() in ("false", "no"):
            return False
        try:
            return int(value)
        except ValueError:
            pass
        try:
            return float(value)
        except ValueError:
            pass
        return value

    @staticmethod
    def _deep_merge(base: dict, override: dict) -> None:
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                if "kind" in value and value["kind"] != base[key].get("kind"):
                    base[key] = copy.deepcopy(value)
                else:
                    Config._deep_merge(base[key], value)
            else:
                base[key] = value


# ─── Models ───────────────────────────────────────────────────────


class RunMode(str, Enum):
    FORWARD = "forward"
    ADJOINT = "adjoint"
    OPTIMIZE = "optimize"
    VERIFY = "verify"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GaussianStateSpec(_Section):
    """u0 = amplitude * exp(-sharpness * |x - center|^2); center defaults to the domain center."""

    kind: Literal["gaussian"] = "gaussian"
    center: list[float] | None = None
    sharpness: float = Field(default=8.0, gt=0)
    amplitude: float = Field(default=1.0, ge=0, le=1)


class ConstantStateSpec(_Section):
    kind: Literal["constant"] = "constant"
    value: float = Field(ge=0, le=1)


class FileStateSpec(_Section):
    """First time column of a field CSV."""

    kind: Literal["file"] = "file"
    path: Path


InitialStateSpec = Annotated[
    GaussianStateSpec | ConstantStateSpec | FileStateSpec, Field(discriminator="kind")
]


class PiecewiseControlSpec(_Section):
    kind: Literal["piecewise"] = "piecewise"
    breakpoints: list[float]
    values: list[float]

    @model_validator(mode="after")
    def _check_lengths(self) -> "PiecewiseControlSpec":
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError(
                f"{len(self.breakpoints)} breakpoints need {len(self.breakpoints) + 1} values"
            )
        return self


class ConstantControlSpec(_Section):
    kind: Literal["constant"] = "constant"
    value: float = Field(ge=0)


class BudgetUniformControlSpec(_Section):
    kind: Literal["budget_uniform"] = "budget_uniform"


class WhiteMatterUniformControlSpec(_Section):
    kind: Literal["white_matter_uniform"] = "white_matter_uniform"


class FileControlSpec(_Section):
    """Full space-time control from a field CSV on the run grid."""

    kind: Literal["file"] = "file"
    path: Path


InitialControlSpec = Annotated[
    PiecewiseControlSpec
    | ConstantControlSpec
    | BudgetUniformControlSpec
    | WhiteMatterUniformControlSpec
    | FileControlSpec,
    Field(discriminator="kind"),
]


class RunConfig(_Section):
    """A complete, validated run description."""

    mode: RunMode = RunMode.FORWARD
    grid: GridConfig = Field(default_factory=GridConfig)
    tissue: TissueConfig = Field(default_factory=TissueConfig)
    control: ControlSpec = Field(default_factory=ControlSpec)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    initial_state: InitialStateSpec = Field(default_factory=GaussianStateSpec)
    initial_control: InitialControlSpec = Field(default_factory=BudgetUniformControlSpec)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    output_dir: Path = Path("results")
    seed: int = Field(default=0, ge=0, lt=2**64)


# ─── Parsing ──────────────────────────────────────────────────────


def _field_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


def _validation_error(error: ValidationError) -> ConfigurationError:
    details = error.errors()
    messages = [f"{_field_path(d['loc'])}: {d['msg']}" for d in details]
    first = _field_path(details[0]["loc"]) if details else None
    return ConfigurationError("invalid config; " + "; ".join(messages), first)


def _resolve_file(section: dict, base_dir: Path) -> None:
    if section.get("kind") == "file" and "path" in section:
        path = Path(section["path"])
        if not path.is_absolute():
            section["path"] = str(base_dir / path)


def validate_config(data: dict) -> RunConfig:
    """Validate a merged mapping and run every eager check."""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e) from e

    grid = build_grid(config.grid)
    tissue_from_config(grid, config.tissue)
    config.control.check_feasible(grid)
    for section in ("initial_state", "initial_control"):
        spec = getattr(config, section)
        if spec.kind == "file" and not spec.path.is_file():
            raise ConfigurationError(f"file not found: {spec.path}", f"{section}.path")
    return config


def parse_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """
    Assemble, validate and eagerly check a run config.

    Args:
        path: Run file (YAML or JSON); None uses defaults plus environment
        overrides: Dot-path values applied last, e.g. {"mode": "verify"}; None values are skipped
        env: Environment mapping (os.environ when None)

    Raises:
        ConfigurationError: unreadable file, invalid field, missing referenced file
        InfeasibleBudgetError: the budget and bound admit no control on this grid
    """
    layered = Config(path, env)
    for key, value in (overrides or {}).items():
        if value is not None:
            layered.set(key, value)

    data = layered.as_dict()
    base_dir = layered.path.parent if layered.path else Path.cwd()
    for section in ("initial_state", "initial_control"):
        if isinstance(data.get(section), dict):
            _resolve_file(data[section], base_dir)

    config = validate_config(data)
    logger.info(f"Config ok: mode={config.mode.value}, output={config.output_dir}")
    return config


def dump_config(config: RunConfig, path: str | Path) -> Path:
    """Write YAML that parses back to an equal RunConfig."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
    return path


# ─── Builders ─────────────────────────────────────────────────────


def build_initial_state(config: RunConfig, grid: Grid) -> np.ndarray:
    spec = config.initial_state
    if isinstance(spec, GaussianStateSpec):
        if spec.center is not None and len(spec.center) != grid.dim:
            raise ConfigurationError(
                f"needs {grid.dim} coordinates, got {len(spec.center)}", "initial_state.center"
            )
        return gaussian_state(grid, spec.center, spec.sharpness, spec.amplitude)
    if isinstance(spec, ConstantStateSpec):
        return constant_state(grid, spec.value)

    table = read_field_csv(spec.path)
    if table.num_cells != grid.num_cells:
        raise ConfigurationError(
            f"file has {table.num_cells} cells, grid has {grid.num_cells}", "initial_state.path"
        )
    return table.values[:, 0]


def build_initial_control(config: RunConfig, tissue: TissueMap) -> SpaceTimeField:
    spec = config.initial_control
    grid = tissue.grid
    budget = config.control.budget
    if isinstance(spec, PiecewiseControlSpec):
        return piecewise_in_time(grid, spec.breakpoints, spec.values)
    if isinstance(spec, ConstantControlSpec):
        return constant(grid, spec.value, FieldRole.CONTROL)
    if isinstance(spec, BudgetUniformControlSpec):
        return budget_uniform(grid, budget)
    if isinstance(spec, WhiteMatterUniformControlSpec):
        return white_matter_uniform(tissue, budget)

    table = read_field_csv(spec.path)
    if table.values.shape != grid.shape:
        raise ConfigurationError(
            f"file holds a {table.values.shape} field, grid needs {grid.shape}",
            "initial_control.path",
        )
    return SpaceTimeField(grid, table.values, FieldRole.CONTROL)


def build_run_objects(config: RunConfig) -> tuple[Grid, TissueMap]:
    grid = build_grid(config.grid)
    return grid, tissue_from_config(grid, config.tissue)
