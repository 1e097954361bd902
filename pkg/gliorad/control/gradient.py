"""
Adjoint Gradients
==================

The Gateaux derivative of J at R in the direction P is

    dJ(R)[P] = integral of  Phi u (u - 1) P  =  integral of  g P,

so the switching function g = Phi u (u - 1) is the L2 gradient of J. The
optimizer moves along the ascent direction of -J~:

    direction = Phi u (1 - u) - penalty (integral of R - budget)

For spatially uniform controls R(t) the direction is the gradient with
respect to R(t) alone, paired over time:

    direction = integral over Omega of Phi u (1 - u)
                - penalty |Omega| (integral of R - budget)

broadcast over cells. The factor |Omega| comes from the chain rule: a
change P(t) moves the space-time integral of R by |Omega| times the time
integral of P.

With the discrete adjoint scheme the adjoint at node n pairs with the
state at node n + 1 and carries the factor dt / w_n, where w_n is the
trapezoid weight; the direction is then the exact gradient of the
discrete objective.

LEARNING POINT: Scaling the Penalty on the Free Set
------------------------------------------------------
The penalty curvature is penalty * c * |Omega| T, where c = |Omega| for
uniform controls and 1 otherwise. For penalty = 100 that is far stiffer than
J, so a plain projected step has to stay tiny to keep the budget in check.
`penalty_preconditioned` applies the inverse of (I + penalty Hessian) on the
free set only (entries not pinned at a bound by the direction), the
projected Newton split used by box QP solvers. By Sherman-Morrison

    d~ = d - penalty c I_F(d) / (1 + penalty c I_F(1))   on F,  0 elsewhere

where I_F is the space-time integral over F. Pinned entries keep their
bound, and <d, d~> > 0 whenever d does not vanish on F, so d~ is still a
descent direction for the clamped update.
"""

import numpy as np

from gliorad.control.objective import constraint_residual
from gliorad.core.control_spec import ControlShape
from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import FieldRole, SpaceTimeField, integrate
from gliorad.solvers.linear import AdjointScheme


def switching_function(
    state: SpaceTimeField,
    adjoint: SpaceTimeField,
    scheme: AdjointScheme = AdjointScheme.CONTINUOUS,
) -> SpaceTimeField:
    """g = Phi u (u - 1), the pointwise gradient of J."""
    if not state.grid.same_as(adjoint.grid):
        raise ConfigurationError("state and adjoint live on different grids")
    grid = state.grid
    u = state.values
    phi = adjoint.values

    if scheme == AdjointScheme.DISCRETE:
        values = np.zeros(grid.shape)
        scale = grid.dt / grid.time_weights[:-1]
        values[:, :-1] = scale * phi[:, :-1] * u[:, 1:] * (u[:, 1:] - 1.0)
    else:
        values = phi * u * (u - 1.0)
    return SpaceTimeField(grid, values, FieldRole.GRADIENT)


def gradient_field(
    state: SpaceTimeField,
    adjoint: SpaceTimeField,
    control: SpaceTimeField,
    penalty: float,
    budget: float,
    shape: ControlShape,
    scheme: AdjointScheme = AdjointScheme.CONTINUOUS,
) -> SpaceTimeField:
    """
    Ascent direction of -J~ at every (cell, time) node.

    Raises:
        ConfigurationError: unknown shape, or a uniform shape with a control
            that varies in space.
    """
    try:
        shape = ControlShape(shape)
    except ValueError as e:
        raise ConfigurationError(f"unknown control shape {shape!r}", "control.shape") from e
    if not control.grid.same_as(state.grid):
        raise ConfigurationError("control and state live on different grids")

    response = -switching_function(state, adjoint, scheme).values
    if shape == ControlShape.UNIFORM:
        if not control.is_spatially_uniform():
            raise ConfigurationError(
                "control varies in space but the shape is uniform_in_space", "control.shape"
            )
        spatial = response.sum(axis=0) * state.grid.cell_volume
        response = np.broadcast_to(spatial, response.shape)

    residual = constraint_residual(control, budget)
    if shape == ControlShape.UNIFORM:
        residual *= state.grid.domain_measure
    direction = response - penalty * residual
    return SpaceTimeField(state.grid, direction, FieldRole.GRADIENT)


def directional_derivative(
    direction: SpaceTimeField,
    perturbation: SpaceTimeField,
    shape: ControlShape,
) -> float:
    """
    First-order change of J~ along a perturbation, as predicted by `direction`.

    Distributed controls pair over space and time. Uniform controls pair over
    time only, using one cell per time node.
    """
    grid = direction.grid
    if ControlShape(shape) == ControlShape.UNIFORM:
        return -float((direction.values[0] * perturbation.values[0]) @ grid.time_weights)
    products = (direction.values * perturbation.values).sum(axis=0)
    return -float(grid.cell_volume * (products @ grid.time_weights))


def penalty_preconditioned(
    direction: SpaceTimeField,
    control: SpaceTimeField,
    penalty: float,
    shape: ControlShape,
    upper_bound: float,
) -> SpaceTimeField:
    """
    `direction` with the penalty curvature divided out on the free set.

    An entry is pinned when it sits at 0 and the direction points down, or
    at M and the direction points up. Entries the rescaled direction would
    push through their bound are pinned as well, and the free set is
    recomputed until it is stable. Returns `direction` unchanged when
    nothing is free or the rescaled field fails to descend.
    """
    if penalty == 0:
        return direction
    scale = direction.grid.domain_measure if ControlShape(shape) == ControlShape.UNIFORM else 1.0
    d = direction.values
    at_lower = control.values <= 0.0
    at_upper = control.values >= upper_bound
    free = ~((at_lower & (d <= 0.0)) | (at_upper & (d >= 0.0)))

    while True:
        if not free.any():
            return direction
        mass = integrate(direction.with_values(np.where(free, d, 0.0)))
        measure = integrate(direction.with_values(free.astype(float)))
        shift = penalty * scale * mass / (1.0 + penalty * scale * measure)
        scaled = np.where(free, d - shift, 0.0)
        pushed_out = free & ((at_lower & (scaled < 0.0)) | (at_upper & (scaled > 0.0)))
        if not pushed_out.any():
            break
        free &= ~pushed_out

    result = direction.with_values(scaled)
    if directional_derivative(direction, result, shape) >= 0.0:
        return direction
    return result
