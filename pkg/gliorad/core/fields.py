"""
Space-Time Fields
==================

A SpaceTimeField holds one real value per (cell, time node) together with
the grid it lives on and a role tag (state, control, adjoint, ...).

Fields are immutable snapshots: the value array is copied on construction
and marked read-only, so a field can be shared between threads and cached
by the optimizer as is.

Quadrature
----------
Every space-time integral in the package goes through `integrate`:
midpoint rule in space (sum over cells times the cell volume) and the
trapezoid rule in time. It is exact for fields that are constant in space
and piecewise linear in time.
"""

import dataclasses
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from gliorad.core.errors import ConfigurationError
from gliorad.core.grid import Grid


class FieldRole(Enum):
    """What a field represents."""

    STATE = "state"              # tumor density u
    CONTROL = "control"          # radiation loss term R
    ADJOINT = "adjoint"          # Phi
    SENSITIVITY = "sensitivity"  # Psi
    GRADIENT = "gradient"        # descent directions and switching functions


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Values of shape (num_cells, num_time_steps + 1) on a grid."""

    grid: Grid
    values: np.ndarray = dataclasses.field(repr=False)
    role: FieldRole

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"{self.role.value} field has shape {values.shape}, grid expects {self.grid.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def slice(self, time_index: int) -> np.ndarray:
        """Cell values at one time node (read-only view)."""
        return self.values[:, time_index]

    def with_values(self, values: np.ndarray, role: FieldRole | None = None) -> "SpaceTimeField":
        """New field on the same grid, keeping the role unless one is given."""
        return SpaceTimeField(self.grid, values, role or self.role)

    def integrate_space(self) -> np.ndarray:
        """Spatial integral at every time node, shape (num_time_steps + 1,)."""
        return self.values.sum(axis=0) * self.grid.cell_volume

    def l2_norm_space(self, time_index: int) -> float:
        """L2(Omega) norm of one time slice."""
        column = self.values[:, time_index]
        return float(np.sqrt(np.sum(column * column) * self.grid.cell_volume))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def is_spatially_uniform(self) -> bool:
        return bool(np.all(self.values == self.values[:1, :]))


# ─── Constructors ───────────────────────────────────────────


def constant(grid: Grid, value: float, role: FieldRole) -> SpaceTimeField:
    """Field equal to `value` everywhere."""
    return SpaceTimeField(grid, np.full(grid.shape, float(value)), role)


def zeros(grid: Grid, role: FieldRole) -> SpaceTimeField:
    return constant(grid, 0.0, role)


def from_function(
    grid: Grid,
    fn: Callable[..., np.ndarray | float],
    role: FieldRole,
) -> SpaceTimeField:
    """
    Sample fn(x, t) in 1D or fn(x, y, t) in 2D at every cell center and time node.

    `fn` receives the coordinate arrays of all cells and one scalar time, and
    must return one value per cell (or a scalar).
    """
    values = np.empty(grid.shape)
    for n, t in enumerate(grid.times):
        values[:, n] = np.broadcast_to(fn(*grid.coordinates, float(t)), (grid.num_cells,))
    return SpaceTimeField(grid, values, role)


def from_time_profile(grid: Grid, profile: np.ndarray, role: FieldRole) -> SpaceTimeField:
    """Spatially uniform field from one value per time node."""
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (grid.num_time_steps + 1,):
        raise ValueError(
            f"time profile has shape {profile.shape}, expected {(grid.num_time_steps + 1,)}"
        )
    return SpaceTimeField(grid, np.tile(profile, (grid.num_cells, 1)), role)


# ─── Algebra ────────────────────────────────────────────────


def integrate(field: SpaceTimeField) -> float:
    """Approximate the integral over Omega x (0, T)."""
    grid = field.grid
    return float(grid.cell_volume * (field.values.sum(axis=0) @ grid.time_weights))


def inner(first: SpaceTimeField, second: SpaceTimeField) -> float:
    """Space-time L2 inner product."""
    _check_same_grid(first, second)
    grid = first.grid
    products = (first.values * second.values).sum(axis=0)
    return float(grid.cell_volume * (products @ grid.time_weights))


def l2_norm(field: SpaceTimeField) -> float:
    """Space-time L2 norm."""
    return float(np.sqrt(max(inner(field, field), 0.0)))


def clamp_field(field: SpaceTimeField, lo: float, hi: float) -> SpaceTimeField:
    """Entrywise projection onto [lo, hi]."""
    if lo > hi:
        raise ConfigurationError(f"lower bound {lo} exceeds upper bound {hi}")
    return field.with_values(np.clip(field.values, lo, hi))


def _check_same_grid(first: SpaceTimeField, second: SpaceTimeField) -> None:
    if not first.grid.same_as(second.grid):
        raise ValueError(
            f"{first.role.value} and {second.role.value} fields live on different grids"
        )
