"""
Sensitivity Problem
====================

Directional derivative Psi of the control-to-state map in the direction
of a perturbation P. It solves the linearized state equation

    Psi_t - div(D grad Psi) - a (1 - 2u) Psi = -P u (1 - u),   Psi(., 0) = 0.

The stepping linearizes each backward-Euler step of the forward solver,

    K_n Psi_{n+1} = Psi_n - dt P_n u_{n+1} (1 - u_{n+1}),

so Psi is the exact tangent of the discrete forward map and agrees with
(u_{R + eps P} - u_R) / eps up to O(eps).
"""

import numpy as np

from gliorad.core.errors import ConfigurationError, SolverError
from gliorad.core.fields import FieldRole, SpaceTimeField
from gliorad.core.tissue import TissueMap
from gliorad.solvers.diffusion import DiffusionOperator, assemble_diffusion
from gliorad.solvers.linear import SolverConfig, StepSystem
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


def solve_sensitivity(
    state: SpaceTimeField,
    control: SpaceTimeField,
    perturbation: SpaceTimeField,
    proliferation: float,
    tissue: TissueMap,
    config: SolverConfig | None = None,
    operator: DiffusionOperator | None = None,
) -> SpaceTimeField:
    """
    Step the linearized equation forward from Psi(., 0) = 0.

    Raises:
        ConfigurationError: fields on different grids or a non-finite perturbation.
        SolverError: a linear solve failed; `time_index` names the step.
    """
    config = config or SolverConfig()
    grid = state.grid
    for other in (control, perturbation):
        if not other.grid.same_as(grid):
            raise ConfigurationError(f"{other.role.value} field lives on a different grid")
    if not tissue.grid.same_as(grid):
        raise ConfigurationError("tissue map lives on a different grid")
    if not perturbation.is_finite():
        raise ConfigurationError("perturbation has non-finite entries")
    operator = operator or assemble_diffusion(grid, tissue)

    u = state.values
    a = proliferation - control.values
    system = StepSystem(operator.matrix, grid.dt, config, iterative=grid.dim > 1)

    values = np.zeros(grid.shape)
    for n in range(grid.num_time_steps):
        u_next = u[:, n + 1]
        rhs = values[:, n] - grid.dt * perturbation.values[:, n] * u_next * (1.0 - u_next)
        if not np.any(rhs):
            continue
        try:
            values[:, n + 1] = system.solve(a[:, n] * (1.0 - 2.0 * u_next), rhs)
        except SolverError as e:
            raise e.at_time(n) from e

    logger.debug(f"Sensitivity solve: max |Psi| = {np.max(np.abs(values)):.3e}")
    return SpaceTimeField(grid, values, FieldRole.SENSITIVITY)
