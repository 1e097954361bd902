"""
Adjoint Problem
================

The adjoint Phi solves the backward-in-time linear problem

    -Phi_t - div(D grad Phi) - b Phi = 1,   Phi(., T) = 0,   b = (rho - R)(1 - 2u),

with no-flux boundary. Substituting tau = T - t turns it into a forward
parabolic problem, which is stepped with backward Euler and read back in
the original time direction:

    (I + dt A - dt diag(b_n)) Phi_n = Phi_{n+1} + dt,    n = N-1, ..., 0

When b vanishes (u = 1/2 everywhere) a constant source is integrated
exactly, so Phi(., t_n) = T - t_n at every node.

The discrete scheme instead transposes the discretized forward map under
the trapezoid objective:

    K_n P_n = P_{n+1} + w_{n+1},   K_n = I + dt A - dt diag((rho - R_n)(1 - 2 u_{n+1}))

with P_N = 0. Its values at node n are the multipliers of step n -> n+1.
"""

import numpy as np

from gliorad.core.errors import ConfigurationError, SolverError
from gliorad.core.fields import FieldRole, SpaceTimeField
from gliorad.core.tissue import TissueMap
from gliorad.solvers.diffusion import DiffusionOperator, assemble_diffusion
from gliorad.solvers.linear import AdjointScheme, SolverConfig, StepSystem
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


def solve_adjoint(
    state: SpaceTimeField,
    control: SpaceTimeField,
    proliferation: float,
    tissue: TissueMap,
    config: SolverConfig | None = None,
    operator: DiffusionOperator | None = None,
) -> SpaceTimeField:
    """
    Step the adjoint backward from Phi(., T) = 0.

    Args:
        state: State from a successful forward solve
        control: Control that produced the state
        proliferation: rho
        tissue: Tissue map of the forward problem (its grid must match the state)
        config: Solver settings, including the adjoint scheme
        operator: Optional pre-assembled diffusion operator

    Raises:
        SolverError: a linear solve failed; `time_index` names the step.
    """
    config = config or SolverConfig()
    grid = state.grid
    if not (control.grid.same_as(grid) and tissue.grid.same_as(grid)):
        raise ConfigurationError("state, control and tissue must share one grid")
    operator = operator or assemble_diffusion(grid, tissue)

    u = state.values
    a = proliferation - control.values
    weights = grid.time_weights
    discrete = config.adjoint_scheme == AdjointScheme.DISCRETE
    system = StepSystem(operator.matrix, grid.dt, config, iterative=grid.dim > 1)

    values = np.zeros(grid.shape)
    for n in range(grid.num_time_steps - 1, -1, -1):
        if discrete:
            reaction = a[:, n] * (1.0 - 2.0 * u[:, n + 1])
            rhs = values[:, n + 1] + weights[n + 1]
        else:
            reaction = a[:, n] * (1.0 - 2.0 * u[:, n])
            rhs = values[:, n + 1] + grid.dt
        try:
            values[:, n] = system.solve(reaction, rhs)
        except SolverError as e:
            raise e.at_time(n) from e

    logger.debug(
        f"Adjoint solve ({config.adjoint_scheme.value}): "
        f"Phi in [{values.min():.3e}, {values.max():.3e}]"
    )
    return SpaceTimeField(grid, values, FieldRole.ADJOINT)
