"""
Shared fixtures: small 1D/2D grids, tissue maps and forward problems.

Grids here are deliberately coarse so every solver test finishes in well
under a second.
"""

import numpy as np
import pytest

from gliorad.core.fields import FieldRole, constant
from gliorad.core.grid import GridConfig, build_grid
from gliorad.core.initial import gaussian_state
from gliorad.core.tissue import IntervalRegion, build_tissue_map
from gliorad.solvers.forward import ForwardProblem


def make_grid(cells=20, steps=10, length=5.0, final_time=0.5, dim=1):
    return build_grid(
        GridConfig(
            dim=dim,
            lengths=[length] * dim,
            cells_per_axis=[cells] * dim,
            num_time_steps=steps,
            final_time=final_time,
        )
    )


def make_tissue(grid, d_white=1.0, d_grey=0.001):
    region = IntervalRegion(intervals=[(0.3, 0.7)], coordinates="fraction")
    return build_tissue_map(grid, region, d_white, d_grey)


def make_problem(grid, control_value=0.3, proliferation=1.0):
    return ForwardProblem(
        tissue=make_tissue(grid),
        proliferation=proliferation,
        control=constant(grid, control_value, FieldRole.CONTROL),
        initial_state=gaussian_state(grid),
    )


@pytest.fixture
def grid_1d():
    """L = 5, 20 cells, 10 steps to T = 0.5."""
    return make_grid()


@pytest.fixture
def grid_2d():
    """[0, 2]^2 with 4 x 4 cells."""
    return make_grid(cells=4, steps=4, length=2.0, dim=2)


@pytest.fixture
def tissue_1d(grid_1d):
    return make_tissue(grid_1d)


@pytest.fixture
def problem_1d(grid_1d):
    return make_problem(grid_1d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
