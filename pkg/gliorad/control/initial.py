"""
Initial control guesses.

    piecewise_in_time     R0(t) = values[k] on the k-th interval between
                          breakpoints (a breakpoint belongs to the interval
                          on its right)
    budget_uniform        R0 = budget / (|Omega| T) everywhere
    white_matter_uniform  R0 = budget / (|Omega_w| T) on white matter, 0 elsewhere

The last two meet the budget exactly under the package quadrature.
"""

import numpy as np

from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import FieldRole, SpaceTimeField, constant, from_time_profile
from gliorad.core.grid import Grid
from gliorad.core.tissue import TissueMap


def piecewise_in_time(grid: Grid, breakpoints: list[float], values: list[float]) -> SpaceTimeField:
    """Spatially uniform step function of time."""
    if len(values) != len(breakpoints) + 1:
        raise ConfigurationError(
            f"{len(breakpoints)} breakpoints need {len(breakpoints) + 1} values, got {len(values)}",
            "initial_control.values",
        )
    if any(later <= earlier for earlier, later in zip(breakpoints, breakpoints[1:])):
        raise ConfigurationError("breakpoints must be increasing", "initial_control.breakpoints")
    interval = np.searchsorted(np.asarray(breakpoints, dtype=float), grid.times, side="right")
    profile = np.asarray(values, dtype=float)[interval]
    return from_time_profile(grid, profile, FieldRole.CONTROL)


def budget_uniform(grid: Grid, budget: float) -> SpaceTimeField:
    """Constant control that spends exactly the budget."""
    return constant(grid, budget / grid.space_time_measure, FieldRole.CONTROL)


def white_matter_uniform(tissue: TissueMap, budget: float) -> SpaceTimeField:
    """Budget spread evenly over white matter, nothing on grey matter."""
    grid = tissue.grid
    white_measure = tissue.white_measure
    if white_measure <= 0:
        raise ConfigurationError("no cell is white matter", "tissue.region")
    level = budget / (white_measure * grid.final_time)
    values = np.where(tissue.white[:, None], level, 0.0) * np.ones(grid.shape)
    return SpaceTimeField(grid, values, FieldRole.CONTROL)
