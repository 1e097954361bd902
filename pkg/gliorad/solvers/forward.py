"""
Forward Problem
================

Backward-Euler time stepping of the tumor equation

    u_t - div(D grad u) = a u (1 - u) + f,     a = rho - R,

with no-flux boundary and u(., 0) = u0. The optional source f is only used
by manufactured-solution studies.

LEARNING POINT: Newton on an Implicit Step
---------------------------------------------
Each step solves the nonlinear system F(u) = 0 with

    F(u) = u + dt A u - dt a_n u (1 - u) - (u_n + dt f(t_{n+1}))
    F'(u) = I + dt A - dt diag(a_n (1 - 2u))

starting from u_n. The reaction is quadratic, so Newton converges in a
handful of iterations whenever dt |a| < 1. The control value at the left
node, R_n, acts on the whole step [t_n, t_{n+1}).

The state is never clipped to [0, 1]: staying in range is checked by the
verification suite.
"""

from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from gliorad.core.errors import ConfigurationError, SolverError
from gliorad.core.fields import FieldRole, SpaceTimeField
from gliorad.core.grid import Grid
from gliorad.core.tissue import TissueMap
from gliorad.solvers.diffusion import DiffusionOperator, assemble_diffusion
from gliorad.solvers.linear import SolverConfig, StepSystem
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

SourceTerm = Callable[[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    """Everything needed to integrate the state equation once."""

    tissue: TissueMap
    proliferation: float
    control: SpaceTimeField
    initial_state: np.ndarray = field(repr=False)
    source: SourceTerm | None = field(default=None, repr=False)

    def __post_init__(self):
        initial = np.array(self.initial_state, dtype=float, copy=True)
        if initial.shape != (self.grid.num_cells,):
            raise ConfigurationError(
                f"initial state has shape {initial.shape}, expected ({self.grid.num_cells},)",
                "initial_state",
            )
        if not np.all(np.isfinite(initial)):
            raise ConfigurationError("initial state has non-finite entries", "initial_state")
        if not self.control.grid.same_as(self.grid):
            raise ConfigurationError("control lives on a different grid", "initial_control")
        if not self.control.is_finite():
            raise ConfigurationError("control has non-finite entries", "initial_control")
        if not self.proliferation > 0:
            raise ConfigurationError(
                f"must be positive, got {self.proliferation}", "control.proliferation"
            )
        initial.setflags(write=False)
        object.__setattr__(self, "initial_state", initial)

    @property
    def grid(self) -> Grid:
        return self.tissue.grid

    @cached_property
    def operator(self) -> DiffusionOperator:
        return assemble_diffusion(self.grid, self.tissue)

    def with_control(self, control: SpaceTimeField) -> "ForwardProblem":
        """Same problem under a different schedule; the assembled operator is reused."""
        updated = replace(self, control=control)
        if "operator" in self.__dict__:
            updated.__dict__["operator"] = self.__dict__["operator"]
        return updated


def step_forward(
    u_n: np.ndarray,
    R_n: np.ndarray,
    dt: float,
    operator: DiffusionOperator,
    proliferation: float,
    config: SolverConfig,
    source: np.ndarray | None = None,
    system: StepSystem | None = None,
) -> np.ndarray:
    """
    Advance the state by one implicit step.

    Raises:
        SolverError: Newton did not reach `newton_tolerance` (sup-norm of the
            residual) within `newton_max_iterations`, or produced non-finite values.
    """
    a = proliferation - R_n
    rhs = u_n if source is None else u_n + dt * source
    u = np.array(u_n, dtype=float, copy=True)
    system = system or StepSystem(operator.matrix, dt, config, iterative=operator.dim > 1)

    residual_norm = np.inf
    for iteration in range(config.newton_max_iterations + 1):
        residual = u + dt * operator.apply(u) - dt * a * u * (1.0 - u) - rhs
        residual_norm = float(np.max(np.abs(residual)))
        if not np.isfinite(residual_norm):
            raise SolverError(
                "Newton produced non-finite values", residual=residual_norm, iterations=iteration
            )
        if residual_norm <= config.newton_tolerance:
            return u
        if iteration == config.newton_max_iterations:
            break

        u = u - system.solve(a * (1.0 - 2.0 * u), residual)

    raise SolverError(
        f"Newton did not converge in {config.newton_max_iterations} iterations "
        f"(residual {residual_norm:.3e})",
        residual=residual_norm,
        iterations=config.newton_max_iterations,
    )


def solve_forward(problem: ForwardProblem, config: SolverConfig | None = None) -> SpaceTimeField:
    """
    Integrate the state equation over the whole horizon.

    Raises:
        SolverError: a step failed; `time_index` names the step.
    """
    config = config or SolverConfig()
    grid = problem.grid
    operator = problem.operator
    controls = problem.control.values
    system = StepSystem(operator.matrix, grid.dt, config, iterative=grid.dim > 1)

    values = np.empty(grid.shape)
    values[:, 0] = problem.initial_state
    for n in range(grid.num_time_steps):
        source = None if problem.source is None else problem.source(float(grid.times[n + 1]))
        try:
            values[:, n + 1] = step_forward(
                values[:, n],
                controls[:, n],
                grid.dt,
                operator,
                problem.proliferation,
                config,
                source,
                system,
            )
        except SolverError as e:
            raise e.at_time(n) from e

    logger.debug(
        f"Forward solve: {grid.num_time_steps} steps, "
        f"u in [{values.min():.3e}, {values.max():.3e}]"
    )
    return SpaceTimeField(grid, values, FieldRole.STATE)
