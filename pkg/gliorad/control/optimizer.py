"""
Projected Gradient Descent
===========================

Searches the box 0 <= R <= M for a minimizer of the augmented objective

    J~(R) = J(R) + (penalty / 2) (integral of R - budget)^2

LEARNING POINT: Accept / Reject Step Control
-----------------------------------------------
Each iteration proposes

    R_c = clamp(R + step * direction, 0, M)

where `direction` is the adjoint-based ascent direction of -J~. The
candidate is kept only if J~ strictly decreases:

    accepted  ->  R = R_c, step *= growth, recompute adjoint and direction
    rejected  ->  step *= shrink, try again from the same R

So the accepted objective values form a nonincreasing sequence by
construction, and every iterate stays inside the box because of the clamp.
The loop ends after `max_iterations` proposals, or when the relative change
of J~ across the last `stall_window` accepted iterates drops below
`tolerance`.

With `precondition_penalty` the direction is first rescaled on the free set
by the inverse penalty curvature (see `gradient.penalty_preconditioned`).
The accept / reject rule is unchanged.

An optional polish step reconstructs the bathtub control from the final
switching function and reports whether it beats the descent result.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gliorad.control.bathtub import BathtubResult, bathtub_reconstruct
from gliorad.control.gradient import (
    gradient_field,
    penalty_preconditioned,
    switching_function,
)
from gliorad.control.objective import (
    augmented_objective,
    bang_bang_fraction,
    constraint_residual,
    objective,
)
from gliorad.core.control_spec import ControlShape, ControlSpec
from gliorad.core.errors import ConfigurationError, OptimizationError, SolverError
from gliorad.core.fields import SpaceTimeField, clamp_field
from gliorad.solvers.adjoint import solve_adjoint
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.solvers.linear import AdjointScheme, SolverConfig
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


class OptimizerConfig(BaseModel):
    """Step-size control and stopping rule."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    initial_step: float = Field(default=1.0, gt=0)
    max_iterations: int = Field(default=200, ge=1)
    step_growth: float = 2.0
    step_shrink: float = 0.5
    tolerance: float = Field(default=1e-6, ge=0)
    stall_window: int = Field(default=10, ge=1)
    bang_bang_tolerance: float = Field(default=1e-2, gt=0)
    polish: bool = False
    precondition_penalty: bool = False

    @model_validator(mode="after")
    def _check_factors(self) -> "OptimizerConfig":
        if not self.step_growth > 1:
            raise ValueError(f"step_growth must exceed 1, got {self.step_growth}")
        if not 0 < self.step_shrink < 1:
            raise ValueError(f"step_shrink must lie in (0, 1), got {self.step_shrink}")
        return self


@dataclass(frozen=True, eq=False)
class PolishReport:
    """Bathtub control built from the final switching function."""

    bathtub: BathtubResult
    bathtub_objective: float
    descent_objective: float

    @property
    def improved(self) -> bool:
        return self.bathtub_objective < self.descent_objective

    def summary(self) -> dict:
        return {
            **self.bathtub.summary(),
            "bathtub_objective": self.bathtub_objective,
            "descent_objective": self.descent_objective,
            "improved": self.improved,
        }


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """Outcome of one projected-gradient run."""

    control: SpaceTimeField
    state: SpaceTimeField
    history: list[float]
    objective: float
    augmented_objective: float
    constraint_residual: float
    bang_bang_fraction: float
    iterations: int
    accepted: int
    final_step: float
    converged: bool
    upper_bound: float
    wall_time: float = field(default=0.0, compare=False)
    polish: PolishReport | None = None

    def __post_init__(self):
        history = np.asarray(self.history)
        if np.any(np.diff(history) > 0):
            raise OptimizationError("accepted objective history increased")
        values = self.control.values
        if values.min() < 0 or values.max() > self.upper_bound:
            raise OptimizationError("final control left [0, M]")

    def summary(self) -> dict:
        """Deterministic summary (wall time is reported separately)."""
        return {
            "objective": self.objective,
            "augmented_objective": self.augmented_objective,
            "objective_history": list(self.history),
            "constraint_residual": self.constraint_residual,
            "bang_bang_fraction": self.bang_bang_fraction,
            "iterations": self.iterations,
            "accepted": self.accepted,
            "final_step": self.final_step,
            "converged": self.converged,
            "polish": self.polish.summary() if self.polish else None,
        }


def _stalled(history: list[float], window: int, tolerance: float) -> bool:
    if len(history) <= window:
        return False
    reference = history[-1 - window]
    change = abs(reference - history[-1])
    return change <= tolerance * max(abs(reference), np.finfo(float).tiny)


def optimize(
    problem: ForwardProblem,
    control_spec: ControlSpec,
    optimizer_config: OptimizerConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> OptimizationResult:
    """
    Run projected gradient descent from `problem.control`.

    Raises:
        ConfigurationError: infeasible budget, an initial guess outside
            [0, M], or a spatially varying guess for a uniform shape.
        OptimizationError: a forward or adjoint solve failed; the SolverError
            is chained as the cause.
    """
    optimizer_config = optimizer_config or OptimizerConfig()
    solver_config = solver_config or SolverConfig()
    grid = problem.grid
    control_spec.check_feasible(grid)

    M = control_spec.upper_bound
    penalty = control_spec.penalty
    budget = control_spec.budget
    shape = control_spec.shape
    scheme = solver_config.adjoint_scheme

    control = problem.control
    if control.values.min() < 0 or control.values.max() > M:
        raise ConfigurationError(f"initial control must lie in [0, {M}]", "initial_control")
    if shape == ControlShape.UNIFORM and not control.is_spatially_uniform():
        raise ConfigurationError(
            "uniform_in_space needs a spatially uniform initial control", "initial_control"
        )
    if control_spec.proliferation != problem.proliferation:
        raise ConfigurationError(
            f"proliferation {problem.proliferation} differs from the control settings "
            f"({control_spec.proliferation})",
            "control.proliferation",
        )

    started = time.perf_counter()
    iteration = 0

    def forward(candidate: SpaceTimeField) -> SpaceTimeField:
        try:
            return solve_forward(problem.with_control(candidate), solver_config)
        except SolverError as e:
            raise OptimizationError(
                f"forward solve failed at iteration {iteration}: {e}", iteration=iteration
            ) from e

    def descent_direction(state: SpaceTimeField, current: SpaceTimeField):
        try:
            adjoint = solve_adjoint(
                state,
                current,
                problem.proliferation,
                problem.tissue,
                solver_config,
                operator=problem.operator,
            )
        except SolverError as e:
            raise OptimizationError(
                f"adjoint solve failed at iteration {iteration}: {e}", iteration=iteration
            ) from e
        direction = gradient_field(state, adjoint, current, penalty, budget, shape, scheme)
        if optimizer_config.precondition_penalty:
            direction = penalty_preconditioned(direction, current, penalty, shape, M)
        return adjoint, direction

    state = forward(control)
    value = augmented_objective(state, control, penalty, budget)
    history = [value]
    adjoint, direction = descent_direction(state, control)
    step = optimizer_config.initial_step
    converged = False

    for iteration in range(1, optimizer_config.max_iterations + 1):
        candidate = clamp_field(
            control.with_values(control.values + step * direction.values), 0.0, M
        )
        candidate_state = forward(candidate)
        candidate_value = augmented_objective(candidate_state, candidate, penalty, budget)

        if candidate_value < value:
            control, state, value = candidate, candidate_state, candidate_value
            history.append(value)
            logger.debug(f"iter {iteration}: accepted J~={value:.10g} step={step:.3g}")
            step *= optimizer_config.step_growth
            adjoint, direction = descent_direction(state, control)
            if _stalled(history, optimizer_config.stall_window, optimizer_config.tolerance):
                converged = True
                break
        else:
            logger.debug(f"iter {iteration}: rejected J~={candidate_value:.10g} step={step:.3g}")
            step *= optimizer_config.step_shrink

    polish = None
    if optimizer_config.polish:
        polish = _polish(problem, control_spec, solver_config, state, adjoint, value, scheme)

    result = OptimizationResult(
        control=control,
        state=state,
        history=history,
        objective=objective(state),
        augmented_objective=value,
        constraint_residual=constraint_residual(control, budget),
        bang_bang_fraction=bang_bang_fraction(control, M, optimizer_config.bang_bang_tolerance),
        iterations=iteration,
        accepted=len(history) - 1,
        final_step=step,
        converged=converged,
        upper_bound=M,
        wall_time=time.perf_counter() - started,
        polish=polish,
    )
    logger.info(
        f"Optimization finished: {result.accepted}/{result.iterations} accepted, "
        f"J~={value:.8g}, residual={result.constraint_residual:.3e}, "
        f"bang-bang={result.bang_bang_fraction:.2%}"
    )
    return result


def _polish(
    problem: ForwardProblem,
    control_spec: ControlSpec,
    solver_config: SolverConfig,
    state: SpaceTimeField,
    adjoint: SpaceTimeField,
    descent_value: float,
    scheme: AdjointScheme,
) -> PolishReport:
    """Bathtub reconstruction on g = Phi u (u - 1) at the final iterate."""
    g = switching_function(state, adjoint, scheme)
    if control_spec.shape == ControlShape.UNIFORM:
        spatial_mean = g.integrate_space() / g.grid.domain_measure
        g = g.with_values(np.broadcast_to(spatial_mean, g.values.shape))

    bathtub = bathtub_reconstruct(g, control_spec.budget, control_spec.upper_bound)
    try:
        bathtub_state = solve_forward(problem.with_control(bathtub.control), solver_config)
    except SolverError as e:
        raise OptimizationError(f"forward solve failed during polish: {e}") from e
    bathtub_value = augmented_objective(
        bathtub_state, bathtub.control, control_spec.penalty, control_spec.budget
    )
    logger.info(f"Polish: bathtub J~={bathtub_value:.8g} vs descent J~={descent_value:.8g}")
    return PolishReport(
        bathtub=bathtub, bathtub_objective=bathtub_value, descent_objective=descent_value
    )
