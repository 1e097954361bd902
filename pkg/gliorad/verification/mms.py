"""
Manufactured Solutions
=======================

Measures the convergence order of the forward solver. The manufactured
solution

    u_m(x, t) = 1/2 (1 + cos(pi x / L) e^{-t})

satisfies the no-flux boundary condition, and the source

    f = d/dt u_m - D d2/dx2 u_m - rho u_m (1 - u_m)

(with R = 0) makes it an exact solution of the forced equation. Two
refinement studies follow:

    time   fine fixed mesh, halve dt   -> expect order 1 (backward Euler)
    space  tiny fixed dt, halve h      -> expect order 2 (centered fluxes)

Orders are the least-squares slope of log(error) against log(dt) or log(h).
"""

from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gliorad.core.fields import FieldRole, zeros
from gliorad.core.grid import GridConfig, build_grid
from gliorad.core.tissue import IntervalRegion, build_tissue_map
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.solvers.linear import SolverConfig
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


class MMSConfig(BaseModel):
    """Parameters of both refinement studies."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    length: float = Field(default=1.0, gt=0)
    diffusion: float = Field(default=1.0, gt=0)
    proliferation: float = Field(default=1.0, gt=0)
    time_study_final_time: float = Field(default=0.5, gt=0)
    time_study_cells: int = Field(default=400, ge=2)
    time_study_steps: list[int] = Field(default=[10, 20, 40, 80], min_length=3)
    space_study_final_time: float = Field(default=0.05, gt=0)
    space_study_steps: int = Field(default=500, ge=1)
    space_study_cells: list[int] = Field(default=[8, 16, 32], min_length=3)
    order_band: float = Field(default=0.2, gt=0)


@dataclass(frozen=True)
class ConvergenceLevel:
    h: float
    dt: float
    error: float


@dataclass(frozen=True)
class ConvergenceStudy:
    time_levels: list[ConvergenceLevel] = field(default_factory=list)
    space_levels: list[ConvergenceLevel] = field(default_factory=list)
    temporal_order: float = float("nan")
    spatial_order: float = float("nan")
    band: float = 0.2

    @property
    def levels(self) -> list[ConvergenceLevel]:
        return [*self.time_levels, *self.space_levels]

    @property
    def temporal_deviation(self) -> float:
        return abs(self.temporal_order - 1.0)

    @property
    def spatial_deviation(self) -> float:
        return abs(self.spatial_order - 2.0)

    @property
    def passed(self) -> bool:
        return self.temporal_deviation <= self.band and self.spatial_deviation <= self.band

    def summary(self) -> dict:
        return {
            "temporal_order": self.temporal_order,
            "spatial_order": self.spatial_order,
            "time_levels": [vars(level) for level in self.time_levels],
            "space_levels": [vars(level) for level in self.space_levels],
        }


def manufactured_solution(x: np.ndarray, t: float, length: float) -> np.ndarray:
    return 0.5 * (1.0 + np.cos(np.pi * x / length) * np.exp(-t))


def manufactured_source(
    x: np.ndarray, t: float, length: float, diffusion: float, proliferation: float
) -> np.ndarray:
    wave = np.cos(np.pi * x / length) * np.exp(-t)
    u = 0.5 * (1.0 + wave)
    time_derivative = -0.5 * wave
    diffusion_term = diffusion * 0.5 * (np.pi / length) ** 2 * wave
    return time_derivative + diffusion_term - proliferation * u * (1.0 - u)


def mms_error(
    cells: int,
    steps: int,
    final_time: float,
    config: MMSConfig,
    solver_config: SolverConfig | None = None,
) -> ConvergenceLevel:
    """L2 error at the final time for one (cells, steps) pair."""
    grid = build_grid(
        GridConfig(
            dim=1,
            lengths=[config.length],
            cells_per_axis=[cells],
            num_time_steps=steps,
            final_time=final_time,
        )
    )
    tissue = build_tissue_map(
        grid,
        IntervalRegion(intervals=[(0.0, config.length)]),
        config.diffusion,
        config.diffusion,
    )
    x = grid.coordinates[0]
    problem = ForwardProblem(
        tissue=tissue,
        proliferation=config.proliferation,
        control=zeros(grid, FieldRole.CONTROL),
        initial_state=manufactured_solution(x, 0.0, config.length),
        source=lambda t: manufactured_source(
            x, t, config.length, config.diffusion, config.proliferation
        ),
    )
    state = solve_forward(problem, solver_config)
    error = state.slice(-1) - manufactured_solution(x, final_time, config.length)
    l2_error = float(np.sqrt(np.sum(error * error) * grid.cell_volume))
    return ConvergenceLevel(h=grid.h, dt=grid.dt, error=l2_error)


def fitted_order(steps: list[float], errors: list[float]) -> float:
    """Slope of log(error) against log(step)."""
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def mms_convergence(
    config: MMSConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> ConvergenceStudy:
    """Run both refinement studies and fit the observed orders."""
    config = config or MMSConfig()

    time_levels = [
        mms_error(
            config.time_study_cells, steps, config.time_study_final_time, config, solver_config
        )
        for steps in config.time_study_steps
    ]
    space_levels = [
        mms_error(
            cells, config.space_study_steps, config.space_study_final_time, config, solver_config
        )
        for cells in config.space_study_cells
    ]
    study = ConvergenceStudy(
        time_levels=time_levels,
        space_levels=space_levels,
        temporal_order=fitted_order(
            [level.dt for level in time_levels], [level.error for level in time_levels]
        ),
        spatial_order=fitted_order(
            [level.h for level in space_levels], [level.error for level in space_levels]
        ),
        band=config.order_band,
    )
    logger.info(
        f"MMS orders: time {study.temporal_order:.3f} (expect 1), "
        f"space {study.spatial_order:.3f} (expect 2)"
    )
    return study
