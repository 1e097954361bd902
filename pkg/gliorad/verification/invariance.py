"""
Invariance Suite
=================

Randomized property checks of the forward solver:

  - nonnegativity   u0 >= 0  =>  u >= -1e-10
  - range           0 <= u0 <= 1  =>  u in [-1e-10, 1 + 1e-10]
  - level sets      u0 strictly inside (0, 1)  =>  no entry exactly 0 or 1
  - zero state      u0 = 0  =>  u = 0 identically
  - mass            R = rho (no reaction)  =>  integral of u is conserved

Each seed draws its own u0, R and white/grey labeling, so the cases are
independent and reproducible from the seed alone.

LEARNING POINT: Fan-Out with run_in_executor
-----------------------------------------------
The solves are blocking numpy/scipy work. Each case is handed to the
default thread pool with `loop.run_in_executor`, and `asyncio.gather`
waits for all of them. Results come back in submission order and the
report sorts records by case id anyway, so the output does not depend on
which thread finished first.
"""

import asyncio
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gliorad.core.fields import FieldRole, SpaceTimeField, constant
from gliorad.core.grid import Grid, GridConfig, build_grid
from gliorad.core.tissue import LabelRegion, build_tissue_map
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.solvers.linear import SolverConfig
from gliorad.utils.logger import setup_logger
from gliorad.verification.report import CaseRecord, SuiteReport, make_record


logger = setup_logger(__name__)


class InvarianceConfig(BaseModel):
    """Grid, tissue and sampling parameters of the randomized suite."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    length: float = Field(default=5.0, gt=0)
    cells: int = Field(default=64, ge=2)
    num_time_steps: int = Field(default=200, ge=1)
    final_time: float = Field(default=0.5, gt=0)
    seeds: int = Field(default=20, ge=0)
    mass_seeds: int = Field(default=3, ge=0)
    base_seed: int = 0
    proliferation: float = Field(default=1.0, gt=0)
    upper_bound: float = Field(default=1.0, gt=0)
    d_white: float = Field(default=1.0, gt=0)
    d_grey: float = Field(default=0.001, gt=0)
    range_tolerance: float = 1e-10
    mass_tolerance: float = 1e-9


def _grid(config: InvarianceConfig) -> Grid:
    return build_grid(
        GridConfig(
            dim=1,
            lengths=[config.length],
            cells_per_axis=[config.cells],
            num_time_steps=config.num_time_steps,
            final_time=config.final_time,
        )
    )


def _problem(
    config: InvarianceConfig,
    grid: Grid,
    rng: np.random.Generator,
    initial_state: np.ndarray,
    control: SpaceTimeField,
) -> ForwardProblem:
    labels = np.where(rng.random(grid.num_cells) < 0.5, "white", "grey").tolist()
    tissue = build_tissue_map(grid, LabelRegion(labels=labels), config.d_white, config.d_grey)
    return ForwardProblem(
        tissue=tissue,
        proliferation=config.proliferation,
        control=control,
        initial_state=initial_state,
    )


def _params(config: InvarianceConfig, kind: str) -> dict:
    return {"suite": "invariance", "kind": kind, **config.model_dump()}


def _random_control(
    config: InvarianceConfig, grid: Grid, rng: np.random.Generator
) -> SpaceTimeField:
    values = rng.uniform(0.0, config.upper_bound, grid.shape)
    return SpaceTimeField(grid, values, FieldRole.CONTROL)


def range_case(
    config: InvarianceConfig, seed: int, solver_config: SolverConfig
) -> list[CaseRecord]:
    """Random u0 in [0, 1] and R in [0, M]."""
    grid = _grid(config)
    rng = np.random.default_rng(seed)
    initial = rng.uniform(0.0, 1.0, grid.num_cells)
    control = _random_control(config, grid, rng)
    state = solve_forward(_problem(config, grid, rng, initial, control), solver_config)

    u = state.values
    strictly_inside = bool(np.all((initial > 0.0) & (initial < 1.0)))
    extreme_fraction = 0.0
    if strictly_inside:
        extreme_fraction = np.count_nonzero((u == 0.0) | (u == 1.0)) / u.size
    case = f"range/seed={seed:04d}"
    params = _params(config, "range")
    return [
        make_record(case, params, "nonnegativity_violation", max(0.0, -u.min()),
                    config.range_tolerance, seed),
        make_record(case, params, "range_violation", max(0.0, -u.min(), u.max() - 1.0),
                    config.range_tolerance, seed),
        make_record(case, params, "extreme_level_fraction", extreme_fraction, 0.0, seed),
    ]


def zero_case(
    config: InvarianceConfig, seed: int, solver_config: SolverConfig
) -> list[CaseRecord]:
    """u0 = 0 stays identically zero under any control."""
    grid = _grid(config)
    rng = np.random.default_rng(seed)
    control = _random_control(config, grid, rng)
    state = solve_forward(
        _problem(config, grid, rng, np.zeros(grid.num_cells), control), solver_config
    )
    return [
        make_record(f"zero/seed={seed:04d}", _params(config, "zero"), "max_abs_state",
                    np.max(np.abs(state.values)), 0.0, seed),
    ]


def mass_case(
    config: InvarianceConfig, seed: int, solver_config: SolverConfig
) -> list[CaseRecord]:
    """R = rho removes the reaction; the spatial integral must not drift."""
    grid = _grid(config)
    rng = np.random.default_rng(seed)
    initial = rng.uniform(0.0, 1.0, grid.num_cells)
    control = constant(grid, config.proliferation, FieldRole.CONTROL)
    state = solve_forward(_problem(config, grid, rng, initial, control), solver_config)

    mass = state.integrate_space()
    drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0]))
    return [
        make_record(f"mass/seed={seed:04d}", _params(config, "mass"), "relative_mass_drift",
                    drift, config.mass_tolerance, seed),
    ]


CaseFn = Callable[[InvarianceConfig, int, SolverConfig], list[CaseRecord]]


def suite_cases(config: InvarianceConfig) -> list[tuple[CaseFn, int]]:
    """Every (case function, seed) pair the suite runs."""
    seeds = [config.base_seed + offset for offset in range(config.seeds)]
    mass_seeds = [config.base_seed + offset for offset in range(config.mass_seeds)]
    cases: list[tuple[CaseFn, int]] = [(range_case, seed) for seed in seeds]
    cases.append((zero_case, config.base_seed))
    cases.extend((mass_case, seed) for seed in mass_seeds)
    return cases


async def run_cases_async(
    jobs: list[Callable[[], list[CaseRecord]]],
    name: str,
) -> SuiteReport:
    """Run blocking case callables concurrently in the default thread pool."""
    loop = asyncio.get_running_loop()
    results = await asyncio.gather(*(loop.run_in_executor(None, job) for job in jobs))
    return SuiteReport(name, [record for records in results for record in records])


async def run_invariance_suite_async(
    config: InvarianceConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> SuiteReport:
    config = config or InvarianceConfig()
    solver_config = solver_config or SolverConfig()
    jobs = [
        (lambda fn=fn, seed=seed: fn(config, seed, solver_config))
        for fn, seed in suite_cases(config)
    ]
    report = await run_cases_async(jobs, "invariance")
    logger.info(
        f"Invariance suite: {len(report.records)} records, "
        f"{len(report.failures)} failures"
    )
    return report


def run_invariance_suite(
    config: InvarianceConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> SuiteReport:
    """Synchronous entry point for `run_invariance_suite_async`."""
    return asyncio.run(run_invariance_suite_async(config, solver_config))
