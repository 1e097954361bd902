"""
Initial tumor densities.

    gaussian  u0 = amplitude * exp(-sharpness * |x - center|^2)
    constant  u0 = value

The standard runs use sharpness 8 in 1D and 5 in 2D, centered in the
domain with amplitude 1.
"""

import numpy as np

from gliorad.core.grid import Grid


def gaussian_state(
    grid: Grid,
    center: list[float] | None = None,
    sharpness: float = 8.0,
    amplitude: float = 1.0,
) -> np.ndarray:
    """Gaussian bump sampled at the cell centers."""
    center = center if center is not None else [length / 2 for length in grid.lengths]
    offset = grid.centers - np.asarray(center, dtype=float)
    return amplitude * np.exp(-sharpness * np.sum(offset * offset, axis=1))


def constant_state(grid: Grid, value: float) -> np.ndarray:
    return np.full(grid.num_cells, float(value))
