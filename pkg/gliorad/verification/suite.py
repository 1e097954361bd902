"""
Verification Suite
===================

Runs every check of the package and collects one `SuiteReport`:

    logistic      forward solver against the closed-form logistic curve
    invariance    randomized range / mass / zero-state properties
    adjoint       Phi = T - t on the constant case, and integral of Psi against g
    gradient      adjoint gradient against central differences of J~
    sensitivity   Psi against forward differences of the state
    entropy       entropy integral stays unclipped for u0 away from 0 and 1
    mms           observed convergence orders of the forward solver
    bathtub       enumerated four-atom oracle and sampled optimality

Every case is a blocking callable returning `CaseRecord`s. All of them are
fanned out together through `run_cases_async`, so one slow suite does not
hold back the others.
"""

import asyncio
from collections.abc import Callable
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gliorad.control.bathtub import bathtub_levels
from gliorad.control.gradient import switching_function
from gliorad.control.initial import budget_uniform
from gliorad.core.control_spec import ControlShape, ControlSpec
from gliorad.core.fields import FieldRole, SpaceTimeField, constant, from_time_profile
from gliorad.core.grid import Grid, GridConfig, build_grid
from gliorad.core.initial import constant_state, gaussian_state
from gliorad.core.tissue import IntervalRegion, TissueMap, build_tissue_map
from gliorad.solvers.adjoint import solve_adjoint
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.solvers.linear import AdjointScheme, SolverConfig
from gliorad.utils.logger import setup_logger
from gliorad.verification.entropy import entropy_diagnostic
from gliorad.verification.invariance import InvarianceConfig, run_cases_async, suite_cases
from gliorad.verification.mms import MMSConfig, mms_convergence
from gliorad.verification.oracles import (
    adjoint_consistency,
    adjoint_constant_case,
    bathtub_optimality,
    gradient_vs_fd,
    logistic_exact,
    sensitivity_vs_fd,
)
from gliorad.verification.report import CaseRecord, SuiteReport, make_record


logger = setup_logger(__name__)


class VerifySuite(str, Enum):
    LOGISTIC = "logistic"
    INVARIANCE = "invariance"
    ADJOINT = "adjoint"
    GRADIENT = "gradient"
    SENSITIVITY = "sensitivity"
    ENTROPY = "entropy"
    MMS = "mms"
    BATHTUB = "bathtub"


class VerifyConfig(BaseModel):
    """Which suites to run and the small problems they run on."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    suites: list[VerifySuite] = Field(default_factory=lambda: list(VerifySuite))
    seed: int = 0

    # Logistic reduction
    logistic_initial: float = Field(default=0.5, ge=0, le=1)
    logistic_rate: float = 1.0
    logistic_final_time: float = Field(default=0.5, gt=0)
    logistic_steps: int = Field(default=500, ge=1)
    logistic_threshold: float = 1e-3

    # Coarse problem shared by the adjoint, gradient, entropy and bathtub checks
    check_length: float = Field(default=5.0, gt=0)
    check_cells: int = Field(default=16, ge=2)
    check_steps: int = Field(default=20, ge=1)
    check_final_time: float = Field(default=0.5, gt=0)
    check_budget: float = Field(default=0.5, gt=0)
    check_penalty: float = Field(default=100.0, ge=0)

    adjoint_constant_threshold: float = 1e-12
    adjoint_consistency_threshold: float = 1e-8
    gradient_epsilon: float = Field(default=1e-5, gt=0)
    gradient_threshold: float = 1e-4
    sensitivity_cells: int = Field(default=32, ge=2)
    sensitivity_epsilon: float = Field(default=1e-4, gt=0, le=1e-2)
    sensitivity_threshold: float = 1e-3
    entropy_threshold: float = 1e-12
    bathtub_samples: int = Field(default=1000, ge=1)
    bathtub_budget_tolerance: float = 1e-12
    bathtub_tolerance: float = 1e-10

    invariance: InvarianceConfig = Field(default_factory=InvarianceConfig)
    mms: MMSConfig = Field(default_factory=MMSConfig)


Job = Callable[[], list[CaseRecord]]


# ─── Shared problems ───────────────────────────────────────────────


def _params(config: VerifyConfig, suite: str) -> dict:
    return {"suite": suite, **config.model_dump(mode="json", exclude={"invariance", "mms"})}


def _check_grid(config: VerifyConfig, cells: int | None = None) -> Grid:
    return build_grid(
        GridConfig(
            dim=1,
            lengths=[config.check_length],
            cells_per_axis=[cells or config.check_cells],
            num_time_steps=config.check_steps,
            final_time=config.check_final_time,
        )
    )


def _check_tissue(grid: Grid) -> TissueMap:
    region = IntervalRegion(intervals=[(0.3, 0.7)], coordinates="fraction")
    return build_tissue_map(grid, region, d_white=1.0, d_grey=0.001)


def _check_problem(grid: Grid, rng: np.random.Generator) -> ForwardProblem:
    control = SpaceTimeField(grid, rng.uniform(0.2, 0.8, grid.shape), FieldRole.CONTROL)
    return ForwardProblem(
        tissue=_check_tissue(grid),
        proliferation=1.0,
        control=control,
        initial_state=gaussian_state(grid),
    )


def _check_spec(config: VerifyConfig, shape: ControlShape, penalty: float) -> ControlSpec:
    return ControlSpec(shape=shape, budget=config.check_budget, penalty=penalty)


def _perturbation(grid: Grid, rng: np.random.Generator) -> SpaceTimeField:
    return SpaceTimeField(grid, rng.uniform(-1.0, 1.0, grid.shape), FieldRole.CONTROL)


# ─── Cases ─────────────────────────────────────────────────────────


def logistic_case(config: VerifyConfig) -> list[CaseRecord]:
    """Spatially uniform data reduces the equation to u' = a u (1 - u)."""
    grid = build_grid(
        GridConfig(
            dim=1,
            lengths=[1.0],
            cells_per_axis=[4],
            num_time_steps=config.logistic_steps,
            final_time=config.logistic_final_time,
        )
    )
    tissue = build_tissue_map(grid, IntervalRegion(intervals=[(0.0, 1.0)]), 1.0, 1.0)
    problem = ForwardProblem(
        tissue=tissue,
        proliferation=1.0,
        control=constant(grid, 1.0 - config.logistic_rate, FieldRole.CONTROL),
        initial_state=constant_state(grid, config.logistic_initial),
    )
    state = solve_forward(problem)
    exact = logistic_exact(config.logistic_initial, config.logistic_rate, grid.final_time)
    final = state.slice(-1)
    error = float(np.max(np.abs(final - exact)) / max(abs(exact), np.finfo(float).tiny))
    return [
        make_record("logistic/final", _params(config, "logistic"), "relative_error",
                    error, config.logistic_threshold),
    ]


def adjoint_cases(config: VerifyConfig) -> list[CaseRecord]:
    params = _params(config, "adjoint")
    grid = _check_grid(config)
    deviation = adjoint_constant_case(_check_tissue(grid))

    rng = np.random.default_rng(config.seed)
    problem = _check_problem(grid, rng)
    discrete = SolverConfig(adjoint_scheme=AdjointScheme.DISCRETE)
    consistency = adjoint_consistency(problem, _perturbation(grid, rng), discrete)
    return [
        make_record("adjoint/constant", params, "max_deviation", deviation,
                    config.adjoint_constant_threshold),
        make_record("adjoint/consistency", params, "relative_gap", consistency,
                    config.adjoint_consistency_threshold, config.seed),
    ]


def gradient_cases(config: VerifyConfig) -> list[CaseRecord]:
    """Both control shapes, each with the configured penalty."""
    params = _params(config, "gradient")
    grid = _check_grid(config)
    solver_config = SolverConfig(adjoint_scheme=AdjointScheme.DISCRETE)
    rng = np.random.default_rng(config.seed)

    problem = _check_problem(grid, rng)
    distributed = gradient_vs_fd(
        problem,
        _check_spec(config, ControlShape.DISTRIBUTED, config.check_penalty),
        _perturbation(grid, rng),
        config.gradient_epsilon,
        solver_config,
        config.gradient_threshold,
    )

    steps = grid.num_time_steps + 1
    uniform_problem = problem.with_control(
        from_time_profile(grid, rng.uniform(0.2, 0.8, steps), FieldRole.CONTROL)
    )
    uniform = gradient_vs_fd(
        uniform_problem,
        _check_spec(config, ControlShape.UNIFORM, config.check_penalty),
        from_time_profile(grid, rng.uniform(-1.0, 1.0, steps), FieldRole.CONTROL),
        config.gradient_epsilon,
        solver_config,
        config.gradient_threshold,
    )
    return [
        make_record("gradient/distributed", params, "relative_error",
                    distributed.relative_error, config.gradient_threshold, config.seed),
        make_record("gradient/uniform", params, "relative_error",
                    uniform.relative_error, config.gradient_threshold, config.seed),
    ]


def sensitivity_case(config: VerifyConfig) -> list[CaseRecord]:
    grid = _check_grid(config, config.sensitivity_cells)
    rng = np.random.default_rng(config.seed)
    problem = _check_problem(grid, rng)
    report = sensitivity_vs_fd(
        problem,
        _perturbation(grid, rng),
        config.sensitivity_epsilon,
        threshold=config.sensitivity_threshold,
    )
    return [
        make_record("sensitivity/random", _params(config, "sensitivity"), "relative_difference",
                    report.relative_difference, config.sensitivity_threshold, config.seed),
    ]


def entropy_cases(config: VerifyConfig) -> list[CaseRecord]:
    params = _params(config, "entropy")
    grid = _check_grid(config)

    half = SpaceTimeField(grid, np.full(grid.shape, 0.5), FieldRole.STATE)
    expected = grid.domain_measure * 2.0 * np.log(2.0)
    constant_error = float(np.max(np.abs(entropy_diagnostic(half).values - expected)))

    problem = ForwardProblem(
        tissue=_check_tissue(grid),
        proliferation=1.0,
        control=budget_uniform(grid, config.check_budget),
        initial_state=0.1 + 0.8 * gaussian_state(grid),
    )
    report = entropy_diagnostic(solve_forward(problem))
    return [
        make_record("entropy/constant", params, "relative_error", constant_error / expected,
                    config.entropy_threshold),
        make_record("entropy/gaussian", params, "clipped_nodes",
                    np.count_nonzero(report.clipped_at), 0.0),
    ]


def mms_case(config: VerifyConfig) -> list[CaseRecord]:
    params = {"suite": "mms", **config.mms.model_dump()}
    study = mms_convergence(config.mms)
    return [
        make_record("mms/space", params, "order_deviation", study.spatial_deviation, study.band),
        make_record("mms/time", params, "order_deviation", study.temporal_deviation, study.band),
    ]


# (g, capacity, expected level, expected control) for four atoms of measure one
FOUR_ATOM_CASES = [
    ([-0.4, -0.3, -0.2, -0.1], 2.0, -0.2, [1.0, 1.0, 0.0, 0.0]),
    ([-0.4, -0.3, -0.2, -0.1], 2.5, -0.2, [1.0, 1.0, 0.5, 0.0]),
]


def bathtub_cases(config: VerifyConfig) -> list[CaseRecord]:
    params = _params(config, "bathtub")
    records = []
    for index, (g, capacity, level, expected) in enumerate(FOUR_ATOM_CASES):
        levels = bathtub_levels(np.array(g), np.ones(4), capacity)
        control = levels.below + levels.plateau * levels.at_level
        error = max(abs(levels.level - level), float(np.max(np.abs(control - expected))))
        records.append(
            make_record(f"bathtub/four_atoms/{index}", params, "max_error", error, 0.0)
        )

    grid = _check_grid(config)
    rng = np.random.default_rng(config.seed)
    problem = _check_problem(grid, rng)
    solver_config = SolverConfig(adjoint_scheme=AdjointScheme.DISCRETE)
    state = solve_forward(problem, solver_config)
    adjoint = solve_adjoint(
        state, problem.control, problem.proliferation, problem.tissue, solver_config
    )
    g = switching_function(state, adjoint, AdjointScheme.DISCRETE)
    report = bathtub_optimality(
        g,
        _check_spec(config, ControlShape.DISTRIBUTED, config.check_penalty),
        config.bathtub_samples,
        config.seed,
        config.bathtub_budget_tolerance,
    )
    records.extend([
        make_record("bathtub/sampled", params, "budget_error", report.budget_error,
                    config.bathtub_budget_tolerance, config.seed),
        make_record("bathtub/sampled", params, "max_violation",
                    report.necessary_condition.max_violation, config.bathtub_tolerance,
                    config.seed),
    ])
    return records


CASES: dict[VerifySuite, Callable[[VerifyConfig], list[CaseRecord]]] = {
    VerifySuite.LOGISTIC: logistic_case,
    VerifySuite.ADJOINT: adjoint_cases,
    VerifySuite.GRADIENT: gradient_cases,
    VerifySuite.SENSITIVITY: sensitivity_case,
    VerifySuite.ENTROPY: entropy_cases,
    VerifySuite.MMS: mms_case,
    VerifySuite.BATHTUB: bathtub_cases,
}


# ─── Entry points ──────────────────────────────────────────────────


def verification_jobs(config: VerifyConfig) -> list[Job]:
    jobs: list[Job] = []
    for suite in dict.fromkeys(config.suites):
        if suite == VerifySuite.INVARIANCE:
            invariance = config.invariance.model_copy(
                update={"base_seed": config.invariance.base_seed + config.seed}
            )
            solver_config = SolverConfig()
            jobs.extend(
                (lambda fn=fn, seed=seed: fn(invariance, seed, solver_config))
                for fn, seed in suite_cases(invariance)
            )
        else:
            jobs.append(lambda case=CASES[suite]: case(config))
    return jobs


async def run_verification_async(config: VerifyConfig | None = None) -> SuiteReport:
    config = config or VerifyConfig()
    jobs = verification_jobs(config)
    logger.info(f"Verification: {len(jobs)} jobs across {len(config.suites)} suites")
    report = await run_cases_async(jobs, "verification")
    if report.passed:
        logger.info(f"Verification passed ({len(report.records)} records)")
    else:
        for record in report.failures:
            logger.warning(
                f"FAILED {record.case} {record.metric}: "
                f"{record.value:.3e} > {record.threshold:.3e}"
            )
    return report


def run_verification(config: VerifyConfig | None = None) -> SuiteReport:
    """Run all configured suites and return one sorted report."""
    return asyncio.run(run_verification_async(config))
