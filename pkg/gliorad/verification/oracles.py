"""
Oracles
========

Independent references the solvers are checked against:

  - logistic_exact         closed form of the spatially uniform problem
  - sensitivity_vs_fd      Psi against a two-solve forward difference
  - gradient_vs_fd         adjoint gradient against a central difference of J~
  - adjoint_consistency    integral of Psi against integral of g P
  - adjoint_constant_case  Phi = T - t when the adjoint reaction vanishes
  - bathtub_optimality     bathtub control against random admissible controls
"""

from dataclasses import dataclass

import numpy as np

from gliorad.control.bathtub import (
    BathtubResult,
    NecessaryConditionReport,
    bathtub_reconstruct,
    necessary_condition_check,
)
from gliorad.control.gradient import directional_derivative, gradient_field, switching_function
from gliorad.control.objective import augmented_objective
from gliorad.core.control_spec import ControlSpec
from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import (
    FieldRole,
    SpaceTimeField,
    constant,
    inner,
    integrate,
    l2_norm,
    zeros,
)
from gliorad.core.tissue import TissueMap
from gliorad.solvers.adjoint import solve_adjoint
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.solvers.linear import AdjointScheme, SolverConfig
from gliorad.solvers.sensitivity import solve_sensitivity
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

# Newton tolerance used inside finite-difference checks so that solver
# noise stays well below the difference quotient
FD_NEWTON_TOLERANCE = 1e-13


def logistic_exact(u0: float, a: float, t: float | np.ndarray) -> float | np.ndarray:
    """Solution of u' = a u (1 - u), u(0) = u0."""
    if not 0.0 <= u0 <= 1.0:
        raise ConfigurationError(f"u0 must lie in [0, 1], got {u0}")
    growth = np.exp(a * np.asarray(t, dtype=float))
    value = u0 * growth / (1.0 - u0 + u0 * growth)
    return float(value) if np.ndim(value) == 0 else value


def _fd_config(config: SolverConfig | None) -> SolverConfig:
    config = config or SolverConfig()
    tolerance = min(config.newton_tolerance, FD_NEWTON_TOLERANCE)
    return config.model_copy(update={"newton_tolerance": tolerance})


def _relative(difference: float, reference: float) -> float:
    if reference == 0.0:
        return abs(difference)
    return abs(difference) / abs(reference)


@dataclass(frozen=True)
class SensitivityReport:
    epsilon: float
    relative_difference: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.relative_difference <= self.threshold


def sensitivity_vs_fd(
    problem: ForwardProblem,
    perturbation: SpaceTimeField,
    epsilon: float = 1e-4,
    solver_config: SolverConfig | None = None,
    threshold: float = 1e-3,
) -> SensitivityReport:
    """Relative L2 gap between Psi and (u_{R + eps P} - u_R) / eps."""
    if not 0.0 < epsilon <= 1e-2:
        raise ConfigurationError(f"epsilon must lie in (0, 1e-2], got {epsilon}")
    config = _fd_config(solver_config)

    state = solve_forward(problem, config)
    shifted = problem.control.with_values(problem.control.values + epsilon * perturbation.values)
    shifted_state = solve_forward(problem.with_control(shifted), config)
    difference = state.with_values((shifted_state.values - state.values) / epsilon)

    psi = solve_sensitivity(
        state,
        problem.control,
        perturbation,
        problem.proliferation,
        problem.tissue,
        config,
        operator=problem.operator,
    )
    gap = l2_norm(psi.with_values(psi.values - difference.values, FieldRole.SENSITIVITY))
    report = SensitivityReport(
        epsilon=epsilon,
        relative_difference=_relative(gap, l2_norm(difference)),
        threshold=threshold,
    )
    logger.debug(f"Sensitivity vs FD (eps={epsilon:g}): {report.relative_difference:.3e}")
    return report


@dataclass(frozen=True)
class GradientCheckReport:
    epsilon: float
    finite_difference: float
    adjoint: float
    relative_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.threshold


def gradient_vs_fd(
    problem: ForwardProblem,
    control_spec: ControlSpec,
    perturbation: SpaceTimeField,
    epsilon: float = 1e-5,
    solver_config: SolverConfig | None = None,
    threshold: float = 1e-4,
) -> GradientCheckReport:
    """
    Central difference of J~ along `perturbation` against the adjoint prediction.

    The box constraint is not applied, so the check measures the gradient of
    the smooth map R -> J~(R).
    """
    config = _fd_config(solver_config)
    penalty, budget = control_spec.penalty, control_spec.budget
    control = problem.control

    def value_at(shift: float) -> float:
        shifted = control.with_values(control.values + shift * perturbation.values)
        state = solve_forward(problem.with_control(shifted), config)
        return augmented_objective(state, shifted, penalty, budget)

    finite_difference = (value_at(epsilon) - value_at(-epsilon)) / (2.0 * epsilon)

    state = solve_forward(problem, config)
    adjoint = solve_adjoint(
        state, control, problem.proliferation, problem.tissue, config, operator=problem.operator
    )
    direction = gradient_field(
        state, adjoint, control, penalty, budget, control_spec.shape, config.adjoint_scheme
    )
    predicted = directional_derivative(direction, perturbation, control_spec.shape)

    report = GradientCheckReport(
        epsilon=epsilon,
        finite_difference=finite_difference,
        adjoint=predicted,
        relative_error=_relative(finite_difference - predicted, finite_difference),
        threshold=threshold,
    )
    logger.debug(
        f"Gradient vs FD ({config.adjoint_scheme.value}): fd={finite_difference:.10g}, "
        f"adjoint={predicted:.10g}, rel={report.relative_error:.3e}"
    )
    return report


def adjoint_consistency(
    problem: ForwardProblem,
    perturbation: SpaceTimeField,
    solver_config: SolverConfig | None = None,
) -> float:
    """Relative gap between integral of Psi and integral of g P, g = Phi u (u - 1)."""
    config = solver_config or SolverConfig()
    state = solve_forward(problem, config)
    common = (problem.proliferation, problem.tissue, config)
    psi = solve_sensitivity(
        state, problem.control, perturbation, *common, operator=problem.operator
    )
    adjoint = solve_adjoint(state, problem.control, *common, operator=problem.operator)
    g = switching_function(state, adjoint, config.adjoint_scheme)
    return _relative(integrate(psi) - inner(g, perturbation), integrate(psi))


def adjoint_constant_case(
    tissue: TissueMap,
    proliferation: float = 1.0,
    solver_config: SolverConfig | None = None,
) -> float:
    """
    Max deviation of Phi from T - t_n for u = 1/2, where the adjoint reaction vanishes.
    """
    config = (solver_config or SolverConfig()).model_copy(
        update={"adjoint_scheme": AdjointScheme.CONTINUOUS}
    )
    grid = tissue.grid
    state = constant(grid, 0.5, FieldRole.STATE)
    control = zeros(grid, FieldRole.CONTROL)
    adjoint = solve_adjoint(state, control, proliferation, tissue, config)
    expected = grid.final_time - grid.times
    return float(np.max(np.abs(adjoint.values - expected[None, :])))


@dataclass(frozen=True, eq=False)
class BathtubOptimalityReport:
    bathtub: BathtubResult
    budget_error: float
    necessary_condition: NecessaryConditionReport
    budget_tolerance: float

    @property
    def passed(self) -> bool:
        return self.budget_error <= self.budget_tolerance and self.necessary_condition.passed


def bathtub_optimality(
    g: SpaceTimeField,
    control_spec: ControlSpec,
    samples: int = 1000,
    seed: int = 0,
    budget_tolerance: float = 1e-12,
) -> BathtubOptimalityReport:
    """Budget exactness and sampled optimality of the bathtub control for weight g."""
    bathtub = bathtub_reconstruct(g, control_spec.budget, control_spec.upper_bound)
    budget_error = _relative(integrate(bathtub.control) - control_spec.budget, control_spec.budget)
    check = necessary_condition_check(
        bathtub.control,
        g,
        samples,
        seed,
        control_spec.upper_bound,
        control_spec.budget,
        include_bathtub=False,
    )
    return BathtubOptimalityReport(bathtub, budget_error, check, budget_tolerance)
