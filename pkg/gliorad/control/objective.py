"""
Objective functionals.

    J(R)  = integral of u_R over Omega x (0, T)               (tumor burden)
    J~(R) = J(R) + (penalty / 2) (integral of R - budget)^2   (augmented)
"""

import numpy as np

from gliorad.core.fields import SpaceTimeField, integrate


def objective(state: SpaceTimeField) -> float:
    """Tumor burden J."""
    return integrate(state)


def constraint_residual(control: SpaceTimeField, budget: float) -> float:
    """integral of R minus the budget."""
    return integrate(control) - budget


def augmented_objective(
    state: SpaceTimeField,
    control: SpaceTimeField,
    penalty: float,
    budget: float,
) -> float:
    """J plus the quadratic budget penalty."""
    residual = constraint_residual(control, budget)
    return objective(state) + 0.5 * penalty * residual * residual


def bang_bang_fraction(control: SpaceTimeField, upper_bound: float, tol: float = 1e-2) -> float:
    """Share of (cell, time) entries within tol * M of 0 or M."""
    values = control.values
    distance = np.minimum(np.abs(values), np.abs(values - upper_bound))
    return float(np.count_nonzero(distance <= tol * upper_bound)) / values.size
