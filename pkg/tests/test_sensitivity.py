"""
Tests for the Sensitivity Solver
==================================

Psi is the tangent of the discrete control-to-state map, so it is linear
in the perturbation, vanishes at t = 0, and matches forward differences
of the state to O(eps).
"""

import numpy as np
import pytest

from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import FieldRole, SpaceTimeField, constant, zeros
from gliorad.solvers.forward import solve_forward
from gliorad.solvers.sensitivity import solve_sensitivity
from gliorad.verification.oracles import sensitivity_vs_fd
from tests.conftest import make_grid, make_problem


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture
def perturbation(grid_1d, rng):
    return SpaceTimeField(grid_1d, rng.uniform(-1, 1, grid_1d.shape), FieldRole.CONTROL)


@pytest.fixture
def sweep_problem(rng):
    """32 cells, 20 steps, one random perturbation shared across epsilons."""
    grid = make_grid(cells=32, steps=20)
    perturbation = SpaceTimeField(grid, rng.uniform(-1, 1, grid.shape), FieldRole.CONTROL)
    return make_problem(grid), perturbation


def _sensitivity(problem, perturbation):
    state = solve_forward(problem)
    return solve_sensitivity(
        state, problem.control, perturbation, problem.proliferation, problem.tissue
    )


# ─── Tests ───────────────────────────────────────────────────

def test_zero_perturbation_gives_zero_sensitivity(problem_1d):
    psi = _sensitivity(problem_1d, zeros(problem_1d.grid, FieldRole.CONTROL))

    assert not psi.values.any()


def test_sensitivity_starts_at_zero(problem_1d, perturbation):
    psi = _sensitivity(problem_1d, perturbation)

    assert not psi.values[:, 0].any()
    assert psi.role == FieldRole.SENSITIVITY


def test_sensitivity_is_linear_in_perturbation(problem_1d, perturbation):
    single = _sensitivity(problem_1d, perturbation)
    double = _sensitivity(problem_1d, perturbation.with_values(2.0 * perturbation.values))

    np.testing.assert_allclose(double.values, 2.0 * single.values, rtol=1e-10, atol=1e-14)


def test_more_radiation_lowers_the_state(problem_1d):
    """A positive perturbation of R can only decrease u."""
    psi = _sensitivity(problem_1d, constant(problem_1d.grid, 1.0, FieldRole.CONTROL))

    assert psi.values.max() <= 0.0
    assert psi.values[:, -1].min() < 0.0


def test_sensitivity_matches_forward_difference(rng):
    grid = make_grid(cells=32, steps=20)
    problem = make_problem(grid)
    perturbation = SpaceTimeField(grid, rng.uniform(-1, 1, grid.shape), FieldRole.CONTROL)

    report = sensitivity_vs_fd(problem, perturbation, epsilon=1e-4)

    assert report.passed
    assert report.relative_difference <= 1e-3


@pytest.mark.parametrize("epsilon, bound", [(1e-3, 1e-2), (1e-4, 1e-3), (1e-5, 1e-3)])
def test_forward_difference_gap_per_epsilon(sweep_problem, epsilon, bound):
    problem, perturbation = sweep_problem

    report = sensitivity_vs_fd(problem, perturbation, epsilon=epsilon)

    assert report.relative_difference <= bound


def test_forward_difference_gap_shrinks_then_levels_off(sweep_problem):
    """O(eps) truncation first; below that the gap must not grow back."""
    problem, perturbation = sweep_problem

    gaps = [
        sensitivity_vs_fd(problem, perturbation, epsilon=eps).relative_difference
        for eps in (1e-3, 1e-4, 1e-5)
    ]

    assert gaps[1] < 0.5 * gaps[0]
    assert gaps[2] <= 1.5 * gaps[1]


def test_sensitivity_rejects_non_finite_perturbation(problem_1d):
    values = np.zeros(problem_1d.grid.shape)
    values[0, 0] = np.inf
    state = solve_forward(problem_1d)

    with pytest.raises(ConfigurationError):
        solve_sensitivity(
            state,
            problem_1d.control,
            SpaceTimeField(problem_1d.grid, values, FieldRole.CONTROL),
            1.0,
            problem_1d.tissue,
        )


@pytest.mark.parametrize("epsilon", [0.0, 0.1])
def test_fd_oracle_rejects_epsilon_out_of_range(problem_1d, perturbation, epsilon):
    with pytest.raises(ConfigurationError):
        sensitivity_vs_fd(problem_1d, perturbation, epsilon=epsilon)
