"""
Bathtub Reconstruction
=======================

Minimizes the linear functional  integral of R g  over the admissible set

    0 <= R <= M,   integral of R = budget

in closed form. With W = budget / M, "fill the tub" from the bottom of g:

    kappa* = sup { kappa : measure{ g < kappa } <= W }
    E1 = { g < kappa* },  E2 = { g = kappa* }
    R* = M on E1,  C M on E2,  0 elsewhere,   C = (W - |E1|) / |E2|

LEARNING POINT: Atoms
------------------------
On the grid every (cell, time node) pair is an atom of measure
cell_volume * w_n (w_n the trapezoid weight), so the atom measures add up
to |Omega| T and  integral of R  is exactly the weighted sum of R over atoms.
Sorting atoms by g and walking the cumulative measure gives kappa* directly.
Ties are grouped by exact floating-point equality; near-ties stay separate.

The module also draws random admissible controls, which is how the
necessary optimality condition is checked by sampling.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from gliorad.core.errors import ConfigurationError, InfeasibleBudgetError
from gliorad.core.fields import FieldRole, SpaceTimeField, integrate
from gliorad.core.grid import Grid
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

# Relative slack when comparing cumulative measures against W
MEASURE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class AtomLevels:
    """Bathtub level on a flat list of atoms."""

    level: float
    below: np.ndarray = field(repr=False)      # g < level
    at_level: np.ndarray = field(repr=False)   # g == level
    below_measure: float
    level_measure: float
    plateau: float


@dataclass(frozen=True, eq=False)
class BathtubResult:
    """Level set decomposition and the reconstructed control."""

    level: float
    below: np.ndarray = field(repr=False)
    at_level: np.ndarray = field(repr=False)
    below_measure: float
    level_measure: float
    plateau: float
    control: SpaceTimeField

    def summary(self) -> dict:
        return {
            "level": self.level,
            "below_measure": self.below_measure,
            "level_measure": self.level_measure,
            "plateau": self.plateau,
        }


def atom_measures(grid: Grid) -> np.ndarray:
    """Measure of every (cell, time node) atom, shaped like a field."""
    return np.broadcast_to(grid.cell_volume * grid.time_weights, grid.shape)


def bathtub_levels(values: np.ndarray, measures: np.ndarray, capacity: float) -> AtomLevels:
    """
    Find kappa*, E1 and E2 for flat arrays of atom values and measures.

    `capacity` is W = budget / M and must satisfy 0 < W <= sum(measures).
    """
    values = np.asarray(values, dtype=float).ravel()
    measures = np.asarray(measures, dtype=float).ravel()
    total = float(measures.sum())
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("bathtub weight has non-finite entries")
    if not capacity > 0 or capacity > total * (1 + MEASURE_RTOL):
        raise InfeasibleBudgetError(
            f"need 0 < budget/M <= {total:.6g}, got {capacity:.6g}", "control.budget"
        )

    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    starts = np.flatnonzero(np.r_[True, sorted_values[1:] != sorted_values[:-1]])
    group_measures = np.add.reduceat(measures[order], starts)
    measure_before = np.concatenate([[0.0], np.cumsum(group_measures)[:-1]])

    slack = MEASURE_RTOL * total
    group = int(np.flatnonzero(measure_before <= capacity + slack)[-1])
    level = float(sorted_values[starts[group]])

    below = values < level
    at_level = values == level
    below_measure = float(measures[below].sum())
    level_measure = float(measures[at_level].sum())

    if capacity >= total * (1 - MEASURE_RTOL):
        plateau = 1.0
    elif level_measure > 0:
        plateau = float(np.clip((capacity - below_measure) / level_measure, 0.0, 1.0))
    else:
        plateau = 0.0

    return AtomLevels(level, below, at_level, below_measure, level_measure, plateau)


def bathtub_reconstruct(
    g: SpaceTimeField,
    budget: float,
    upper_bound: float,
    grid: Grid | None = None,
) -> BathtubResult:
    """
    Closed-form minimizer of integral of R g over the admissible set.

    Raises:
        InfeasibleBudgetError: budget / M outside (0, |Omega| T].
        ConfigurationError: non-finite g or a non-positive bound.
    """
    grid = grid or g.grid
    if not upper_bound > 0:
        raise ConfigurationError(f"must be positive, got {upper_bound}", "control.upper_bound")

    levels = bathtub_levels(g.values, atom_measures(grid), budget / upper_bound)
    below = levels.below.reshape(grid.shape)
    at_level = levels.at_level.reshape(grid.shape)
    values = upper_bound * (below + levels.plateau * at_level)

    logger.debug(
        f"Bathtub: level={levels.level:.6g}, |E1|={levels.below_measure:.6g}, "
        f"|E2|={levels.level_measure:.6g}, C={levels.plateau:.6g}"
    )
    return BathtubResult(
        level=levels.level,
        below=below,
        at_level=at_level,
        below_measure=levels.below_measure,
        level_measure=levels.level_measure,
        plateau=levels.plateau,
        control=SpaceTimeField(grid, values, FieldRole.CONTROL),
    )


def random_feasible_control(
    grid: Grid,
    upper_bound: float,
    budget: float,
    rng: np.random.Generator,
) -> SpaceTimeField:
    """
    Draw an admissible control: a uniform random field in [0, M], scaled by
    the factor s for which clamp(s U, 0, M) integrates to the budget.
    """
    capacity = budget / upper_bound
    total = grid.space_time_measure
    if not capacity > 0 or capacity > total * (1 + MEASURE_RTOL):
        raise InfeasibleBudgetError(
            f"need 0 < budget/M <= {total:.6g}, got {capacity:.6g}", "control.budget"
        )
    if capacity >= total * (1 - MEASURE_RTOL):
        return SpaceTimeField(grid, np.full(grid.shape, float(upper_bound)), FieldRole.CONTROL)

    sample = SpaceTimeField(grid, rng.uniform(0.0, upper_bound, grid.shape), FieldRole.CONTROL)

    def excess(scale: float) -> float:
        clamped = np.clip(scale * sample.values, 0.0, upper_bound)
        return integrate(sample.with_values(clamped)) - budget

    high = 1.0
    while excess(high) < 0:
        high *= 2.0
    scale = brentq(excess, 0.0, high, xtol=1e-15)
    return sample.with_values(np.clip(scale * sample.values, 0.0, upper_bound))


@dataclass(frozen=True)
class NecessaryConditionReport:
    """Sampled check of integral of R* g <= integral of R g over admissible R."""

    candidate_value: float
    best_sample_value: float
    max_violation: float
    violations: int
    samples: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def necessary_condition_check(
    candidate: SpaceTimeField,
    g: SpaceTimeField,
    count: int,
    seed: int,
    upper_bound: float,
    budget: float,
    include_bathtub: bool = True,
    tolerance: float = 1e-10,
) -> NecessaryConditionReport:
    """
    Compare integral of R_candidate g against `count` random admissible controls.

    The bathtub control is added as one more sample unless `include_bathtub`
    is False; it is the exact minimizer, so a non-optimal candidate shows a
    positive violation even when random samples do not beat it.
    """
    grid = g.grid
    weighted = atom_measures(grid)
    candidate_value = float(np.sum(candidate.values * g.values * weighted))

    rng = np.random.default_rng(seed)
    sample_values = []
    for _ in range(count):
        sample = random_feasible_control(grid, upper_bound, budget, rng)
        sample_values.append(float(np.sum(sample.values * g.values * weighted)))
    if include_bathtub:
        optimum = bathtub_reconstruct(g, budget, upper_bound, grid).control
        sample_values.append(float(np.sum(optimum.values * g.values * weighted)))
    if not sample_values:
        raise ConfigurationError("necessary-condition check needs at least one sample")

    margins = candidate_value - np.asarray(sample_values)
    report = NecessaryConditionReport(
        candidate_value=candidate_value,
        best_sample_value=float(np.min(sample_values)),
        max_violation=float(np.max(margins)),
        violations=int(np.count_nonzero(margins > tolerance)),
        samples=len(sample_values),
        tolerance=tolerance,
    )
    logger.debug(
        f"Necessary condition: {report.violations}/{report.samples} violations, "
        f"max {report.max_violation:.3e}"
    )
    return report
