"""
Space-Time Grid
================

Uniform tensor-product mesh (1D or 2D) with a uniform time partition.

LEARNING POINT: Cell-Centered Layout
---------------------------------------
Unknowns live at cell centers, not at the mesh nodes:

    |  x0  |  x1  |  x2  |  x3  |        x_i = (i + 1/2) h
    0                          L

The boundary lies on cell faces, so the no-flux condition is imposed by
mirroring the boundary cell (the face flux is simply zero). Every center
is strictly inside the domain.

In 2D the cells are flattened in C order: cell (ix, iy) has index
ix * ny + iy. Both axes must use the same spacing h.

Time nodes include both t = 0 and t = T, so a field sampled on the grid
has num_time_steps + 1 columns.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict

from gliorad.core.errors import ConfigurationError
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

# Relative tolerance when comparing the spacing of the two axes in 2D
SPACING_RTOL = 1e-12


class GridConfig(BaseModel):
    """
    Raw grid parameters as they appear in a run config.

    Values are only type-checked here; `build_grid` validates them so the
    error carries the offending field path.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: int = 1
    lengths: list[float] = [5.0]
    cells_per_axis: list[int] = [100]
    num_time_steps: int = 500
    final_time: float = 0.5


@dataclass(frozen=True, eq=False)
class Grid:
    """Validated space-time grid. Build it with `build_grid`."""

    dim: int
    lengths: tuple[float, ...]
    cells_per_axis: tuple[int, ...]
    num_time_steps: int
    final_time: float
    h: float
    dt: float
    centers: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of a space-time value array: cells x time nodes."""
        return (self.num_cells, self.num_time_steps + 1)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def domain_measure(self) -> float:
        """|Omega|."""
        return float(np.prod(self.lengths))

    @property
    def space_time_measure(self) -> float:
        """|Omega| * T, the upper end of the budget feasibility bound."""
        return self.domain_measure * self.final_time

    @cached_property
    def time_weights(self) -> np.ndarray:
        """Trapezoid weights: dt/2 at both end nodes, dt in between."""
        weights = np.full(self.num_time_steps + 1, self.dt)
        weights[0] = weights[-1] = 0.5 * self.dt
        weights.setflags(write=False)
        return weights

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Per-axis center coordinates of every cell, e.g. (x,) or (x, y)."""
        return tuple(self.centers[:, axis] for axis in range(self.dim))

    def axis_centers(self, axis: int) -> np.ndarray:
        """Center coordinates along a single axis (length cells_per_axis[axis])."""
        return (np.arange(self.cells_per_axis[axis]) + 0.5) * self.h

    def same_as(self, other: "Grid") -> bool:
        """True when two grids describe the same discretization."""
        return (
            self is other
            or (
                self.dim == other.dim
                and self.lengths == other.lengths
                and self.cells_per_axis == other.cells_per_axis
                and self.num_time_steps == other.num_time_steps
                and self.final_time == other.final_time
            )
        )


def build_grid(config: GridConfig) -> Grid:
    """
    Validate a GridConfig and derive spacing, time step and cell centers.

    Raises:
        ConfigurationError: non-positive extent or count, inconsistent
            dimensions, or unequal spacing in 2D.
    """
    if config.dim not in (1, 2):
        raise ConfigurationError(f"dim must be 1 or 2, got {config.dim}", "grid.dim")
    if len(config.lengths) != config.dim:
        raise ConfigurationError(
            f"expected {config.dim} lengths, got {len(config.lengths)}", "grid.lengths"
        )
    if len(config.cells_per_axis) != config.dim:
        raise ConfigurationError(
            f"expected {config.dim} cell counts, got {len(config.cells_per_axis)}",
            "grid.cells_per_axis",
        )

    for axis, length in enumerate(config.lengths):
        if not np.isfinite(length) or length <= 0:
            raise ConfigurationError(
                f"extent must be positive, got {length}", f"grid.lengths.{axis}"
            )
    for axis, cells in enumerate(config.cells_per_axis):
        if cells <= 0:
            raise ConfigurationError(
                f"cell count must be positive, got {cells}", f"grid.cells_per_axis.{axis}"
            )
    if config.num_time_steps <= 0:
        raise ConfigurationError(
            f"must be positive, got {config.num_time_steps}", "grid.num_time_steps"
        )
    if not np.isfinite(config.final_time) or config.final_time <= 0:
        raise ConfigurationError(f"must be positive, got {config.final_time}", "grid.final_time")

    spacings = [length / cells for length, cells in zip(config.lengths, config.cells_per_axis)]
    if config.dim == 2 and not np.isclose(spacings[0], spacings[1], rtol=SPACING_RTOL, atol=0.0):
        raise ConfigurationError(
            f"both axes need the same spacing, got {spacings[0]} and {spacings[1]}",
            "grid.cells_per_axis",
        )
    h = spacings[0]
    dt = config.final_time / config.num_time_steps

    axes = [(np.arange(cells) + 0.5) * h for cells in config.cells_per_axis]
    if config.dim == 1:
        centers = axes[0].reshape(-1, 1)
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        centers = np.column_stack([xx.ravel(), yy.ravel()])
    centers.setflags(write=False)

    times = np.linspace(0.0, config.final_time, config.num_time_steps + 1)
    times.setflags(write=False)

    grid = Grid(
        dim=config.dim,
        lengths=tuple(float(length) for length in config.lengths),
        cells_per_axis=tuple(int(cells) for cells in config.cells_per_axis),
        num_time_steps=int(config.num_time_steps),
        final_time=float(config.final_time),
        h=h,
        dt=dt,
        centers=centers,
        times=times,
    )
    logger.debug(f"Grid built: {grid.cells_per_axis} cells, h={h:.4g}, dt={dt:.4g}")
    return grid
