"""
Diffusion Operator
===================

Finite-volume discretization of -div(D(x) grad u) with a no-flux boundary.

LEARNING POINT: Flux Form
----------------------------
Every interior face f between cells i and j carries a conductance

    k_f = harmonic_mean(D_i, D_j) / h^2,   harmonic_mean = 2 D_i D_j / (D_i + D_j)

and the operator is A = G^T diag(k) G, where G is the face-difference
matrix ((G u)_f = u_j - u_i). Boundary faces carry no flux, which is the
mirror-ghost-cell Neumann condition. Consequences:

  - A is symmetric positive semi-definite
  - the constant field is in the kernel (row sums vanish)

`apply` evaluates G^T (k * (G u)) directly instead of multiplying by the
assembled matrix. The face differences of a constant field are exactly
zero, so `apply` returns an exact zero vector for it; the assembled
matrix is only used inside linear solves.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from gliorad.core.grid import Grid
from gliorad.core.tissue import TissueMap
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    """Sparse symmetric operator on cell values."""

    grid: Grid
    gradient: sp.csr_matrix = field(repr=False)     # faces x cells
    conductance: np.ndarray = field(repr=False)     # one k_f per interior face
    matrix: sp.csr_matrix = field(repr=False)       # G^T diag(k) G

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def num_cells(self) -> int:
        return self.grid.num_cells

    def apply(self, values: np.ndarray) -> np.ndarray:
        """A @ values in flux form."""
        return self.gradient.T @ (self.conductance * (self.gradient @ values))

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


def _interior_faces(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (left, right) of every interior face."""
    if grid.dim == 1:
        cells = np.arange(grid.num_cells)
        return cells[:-1], cells[1:]

    nx, ny = grid.cells_per_axis
    index = np.arange(nx * ny).reshape(nx, ny)
    left = np.concatenate([index[:-1, :].ravel(), index[:, :-1].ravel()])
    right = np.concatenate([index[1:, :].ravel(), index[:, 1:].ravel()])
    return left, right


def assemble_diffusion(grid: Grid, tissue: TissueMap) -> DiffusionOperator:
    """Build the operator with harmonic-mean face diffusivities."""
    left, right = _interior_faces(grid)
    num_faces = left.size

    d_left = tissue.diffusion[left]
    d_right = tissue.diffusion[right]
    conductance = (2.0 * d_left * d_right / (d_left + d_right)) / grid.h**2

    faces = np.arange(num_faces)
    gradient = sp.coo_matrix(
        (
            np.concatenate([-np.ones(num_faces), np.ones(num_faces)]),
            (np.concatenate([faces, faces]), np.concatenate([left, right])),
        ),
        shape=(num_faces, grid.num_cells),
    ).tocsr()
    if num_faces:
        matrix = (gradient.T @ sp.diags(conductance) @ gradient).tocsr()
    else:
        matrix = sp.csr_matrix((grid.num_cells, grid.num_cells))

    logger.debug(f"Diffusion operator assembled: {grid.num_cells} cells, {num_faces} faces")
    return DiffusionOperator(grid=grid, gradient=gradient, conductance=conductance, matrix=matrix)
