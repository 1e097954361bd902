"""
Tests for the Diffusion Operator
==================================

LEARNING POINT: Structural Properties
----------------------------------------
Rather than comparing against hand-assembled matrices only, most tests
here check properties every correct no-flux discretization must have:
symmetry, vanishing row sums, positive semi-definiteness, and an exact
zero on constant fields.
"""

import numpy as np
import pytest

from gliorad.core.grid import GridConfig, build_grid
from gliorad.core.tissue import IntervalRegion, LabelRegion, build_tissue_map
from gliorad.solvers.diffusion import assemble_diffusion
from tests.conftest import make_grid, make_tissue


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture
def operator_1d(grid_1d, tissue_1d):
    return assemble_diffusion(grid_1d, tissue_1d)


@pytest.fixture
def operator_2d():
    grid = make_grid(cells=6, steps=2, length=3.0, dim=2)
    labels = ["white" if index % 3 else "grey" for index in range(grid.num_cells)]
    tissue = build_tissue_map(grid, LabelRegion(labels=labels), 1.0, 0.001)
    return assemble_diffusion(grid, tissue)


# ─── Tests ───────────────────────────────────────────────────

@pytest.mark.parametrize("operator_name", ["operator_1d", "operator_2d"])
def test_apply_on_constant_is_exactly_zero(operator_name, request):
    operator = request.getfixturevalue(operator_name)

    result = operator.apply(np.full(operator.num_cells, 0.37))

    assert np.all(result == 0.0)


@pytest.mark.parametrize("operator_name", ["operator_1d", "operator_2d"])
def test_matrix_is_symmetric_with_zero_row_sums(operator_name, request):
    operator = request.getfixturevalue(operator_name)

    asymmetry = operator.matrix - operator.matrix.T

    assert abs(asymmetry).max() <= 1e-12
    np.testing.assert_allclose(operator.row_sums(), 0.0, atol=1e-9)


@pytest.mark.parametrize("operator_name", ["operator_1d", "operator_2d"])
def test_matrix_is_positive_semidefinite(operator_name, request, rng):
    operator = request.getfixturevalue(operator_name)

    for _ in range(5):
        u = rng.standard_normal(operator.num_cells)
        assert u @ operator.apply(u) >= -1e-12


def test_apply_matches_assembled_matrix(operator_2d, rng):
    u = rng.standard_normal(operator_2d.num_cells)

    np.testing.assert_allclose(operator_2d.apply(u), operator_2d.matrix @ u, atol=1e-10)


def test_uniform_1d_stencil():
    """D = 1, h = 1: interior rows [-1, 2, -1], boundary rows [1, -1]."""
    grid = build_grid(GridConfig(lengths=[4.0], cells_per_axis=[4], num_time_steps=1))
    tissue = build_tissue_map(grid, IntervalRegion(intervals=[(0.0, 4.0)]), 1.0, 1.0)

    dense = assemble_diffusion(grid, tissue).matrix.toarray()

    expected = np.array(
        [
            [1.0, -1.0, 0.0, 0.0],
            [-1.0, 2.0, -1.0, 0.0],
            [0.0, -1.0, 2.0, -1.0],
            [0.0, 0.0, -1.0, 1.0],
        ]
    )
    np.testing.assert_allclose(dense, expected)


def test_face_conductance_is_harmonic_mean():
    grid = build_grid(GridConfig(lengths=[1.0], cells_per_axis=[2], num_time_steps=1))
    tissue = build_tissue_map(grid, LabelRegion(labels=["white", "grey"]), 1.0, 0.001)

    operator = assemble_diffusion(grid, tissue)

    expected = 2 * 1.0 * 0.001 / 1.001 / grid.h**2
    assert operator.conductance == pytest.approx([expected])


def test_2d_face_count():
    grid = make_grid(cells=5, steps=1, length=5.0, dim=2)

    tissue = build_tissue_map(grid, LabelRegion(labels=["white"] * grid.num_cells), 1.0, 0.001)

    operator = assemble_diffusion(grid, tissue)

    assert operator.conductance.size == 2 * 5 * 4
    assert operator.dim == 2


def test_single_cell_has_no_faces():
    grid = build_grid(GridConfig(lengths=[1.0], cells_per_axis=[1], num_time_steps=1))
    tissue = make_tissue(grid)

    operator = assemble_diffusion(grid, tissue)

    assert operator.matrix.shape == (1, 1)
    assert operator.matrix.nnz == 0
    assert operator.apply(np.array([3.0])) == pytest.approx([0.0])
